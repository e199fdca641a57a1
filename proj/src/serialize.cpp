#include "polyfine/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace polyfine {

using nlohmann::json;

namespace {

int line_of_byte(const std::string& text, std::size_t byte) {
    const std::size_t end = std::min(byte, text.size());
    return 1 + int(std::count(text.begin(), text.begin() + end, '\n'));
}

json parse_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), line_of_byte(text, e.byte > 0 ? e.byte - 1 : 0));
    }
}

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(std::string("missing field \"") + name + "\"");
    return *it;
}

int int_field(const json& j, const char* name) {
    const json& v = field(j, name);
    if (!v.is_number_integer()) throw ParseError(std::string("field \"") + name + "\" must be an integer");
    return v.get<int>();
}

std::vector<double> double_array(const json& j, const char* name, std::size_t want) {
    if (!j.is_array() || j.size() != want)
        throw ParseError(std::string("\"") + name + "\" must be an array of length " + std::to_string(want));
    std::vector<double> out(want);
    for (std::size_t i = 0; i < want; ++i) {
        if (!j[i].is_number()) throw ParseError(std::string("\"") + name + "\" entries must be numbers");
        out[i] = j[i].get<double>();
    }
    return out;
}

// Flattens an arbitrarily nested array of known dimensions into dst.
void flatten_nested(const json& j, const char* name, const std::vector<std::size_t>& dims,
                    std::size_t level, std::vector<double>& dst) {
    if (level == dims.size()) {
        if (!j.is_number()) throw ParseError(std::string("\"") + name + "\" entries must be numbers");
        dst.push_back(j.get<double>());
        return;
    }
    if (!j.is_array() || j.size() != dims[level])
        throw ParseError(std::string("\"") + name + "\" has wrong shape at depth " + std::to_string(level));
    for (const json& sub : j) flatten_nested(sub, name, dims, level + 1, dst);
}

std::vector<double> nested_field(const json& j, const char* name, const std::vector<std::size_t>& dims) {
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    std::vector<double> out;
    out.reserve(total);
    flatten_nested(field(j, name), name, dims, 0, out);
    return out;
}

// Re-nests a flat row-major array into nested JSON arrays of the given shape.
json nest(const std::vector<double>& flat, std::size_t& pos, const std::vector<std::size_t>& dims,
          std::size_t level) {
    json out = json::array();
    if (level + 1 == dims.size()) {
        for (std::size_t i = 0; i < dims[level]; ++i) out.push_back(flat[pos++]);
        return out;
    }
    for (std::size_t i = 0; i < dims[level]; ++i) out.push_back(nest(flat, pos, dims, level + 1));
    return out;
}

json nest(const std::vector<double>& flat, const std::vector<std::size_t>& dims) {
    std::size_t pos = 0;
    return nest(flat, pos, dims, 0);
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path);
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failure on " + path);
}

std::string serialize_mdp(const TabularMDP& mdp) {
    const auto S = std::size_t(mdp.S), A = std::size_t(mdp.A), H = std::size_t(mdp.H);
    json j;
    j["S"] = mdp.S;
    j["A"] = mdp.A;
    j["H"] = mdp.H;
    j["initial"] = mdp.initial;
    j["transitions"] = nest(mdp.transitions, {H, S, A, S});
    j["rewards"] = nest(mdp.rewards, {H, S, A});
    return j.dump();
}

TabularMDP parse_mdp(const std::string& text) {
    const json j = parse_document(text);
    if (!j.is_object()) throw ParseError("top-level value must be an object");
    TabularMDP mdp;
    mdp.S = int_field(j, "S");
    mdp.A = int_field(j, "A");
    mdp.H = int_field(j, "H");
    if (mdp.S <= 0 || mdp.A <= 0 || mdp.H <= 0)
        throw ParseError("\"S\", \"A\", \"H\" must all be positive");
    const auto S = std::size_t(mdp.S), A = std::size_t(mdp.A), H = std::size_t(mdp.H);
    mdp.initial = double_array(field(j, "initial"), "initial", S);
    mdp.transitions = nested_field(j, "transitions", {H, S, A, S});
    mdp.rewards = nested_field(j, "rewards", {H, S, A});
    validate_mdp(mdp);
    return mdp;
}

void save_mdp(const TabularMDP& mdp, const std::string& path) {
    write_text_file(path, serialize_mdp(mdp) + "\n");
}

TabularMDP load_mdp(const std::string& path) { return parse_mdp(read_text_file(path)); }

std::string serialize_policy(const Policy& policy) {
    json j;
    j["S"] = policy.S;
    j["A"] = policy.A;
    j["H"] = policy.steps;
    j["probs"] = nest(policy.probs, {std::size_t(policy.steps), std::size_t(policy.S), std::size_t(policy.A)});
    return j.dump();
}

Policy parse_policy(const std::string& text) {
    const json j = parse_document(text);
    if (!j.is_object()) throw ParseError("top-level value must be an object");
    Policy policy;
    policy.S = int_field(j, "S");
    policy.A = int_field(j, "A");
    policy.steps = int_field(j, "H");
    if (policy.S <= 0 || policy.A <= 0 || policy.steps <= 0)
        throw ParseError("\"S\", \"A\", \"H\" must all be positive");
    policy.probs = nested_field(j, "probs",
                                {std::size_t(policy.steps), std::size_t(policy.S), std::size_t(policy.A)});
    validate_policy(policy, policy.S, policy.A);
    return policy;
}

void save_policy(const Policy& policy, const std::string& path) {
    write_text_file(path, serialize_policy(policy) + "\n");
}

Policy load_policy(const std::string& path) { return parse_policy(read_text_file(path)); }

std::string serialize_dataset(const EpisodeDataset& data) {
    std::ostringstream out;
    json header;
    header["H"] = data.episodes.empty() ? 0 : int(data.episodes.front().states.size());
    header["behavior"] = data.behavior_tag;
    header["seed"] = data.seed;
    out << header.dump() << '\n';
    for (const Episode& ep : data.episodes) {
        json j;
        j["states"] = ep.states;
        j["actions"] = ep.actions;
        j["rewards"] = ep.rewards;
        out << j.dump() << '\n';
    }
    return out.str();
}

EpisodeDataset parse_dataset(const std::string& text) {
    std::istringstream in(text);
    std::string linebuf;
    int lineno = 0;
    EpisodeDataset data;
    int H = -1;

    auto parse_line = [&](const std::string& s) {
        try {
            return json::parse(s);
        } catch (const json::parse_error& e) {
            throw ParseError(e.what(), lineno);
        }
    };
    auto int_vec = [&](const json& j, const char* name, std::size_t want) {
        if (!j.is_array() || j.size() != want)
            throw ParseError(std::string("\"") + name + "\" must be an array of length " + std::to_string(want),
                             lineno);
        std::vector<int> out(want);
        for (std::size_t i = 0; i < want; ++i) {
            if (!j[i].is_number_integer())
                throw ParseError(std::string("\"") + name + "\" entries must be integers", lineno);
            out[i] = j[i].get<int>();
        }
        return out;
    };

    while (std::getline(in, linebuf)) {
        ++lineno;
        if (linebuf.empty()) continue;
        const json j = parse_line(linebuf);
        if (!j.is_object()) throw ParseError("each line must be a JSON object", lineno);
        if (H < 0) {
            if (!j.contains("H")) throw ParseError("first line must be the dataset header", lineno);
            H = j["H"].is_number_integer() ? j["H"].get<int>() : -1;
            if (H < 0) throw ParseError("header \"H\" must be a nonnegative integer", lineno);
            data.behavior_tag = j.contains("behavior") && j["behavior"].is_string()
                                    ? j["behavior"].get<std::string>()
                                    : std::string();
            data.seed = j.contains("seed") && j["seed"].is_number() ? j["seed"].get<std::uint64_t>() : 0;
            continue;
        }
        Episode ep;
        ep.states = int_vec(field(j, "states"), "states", std::size_t(H));
        ep.actions = int_vec(field(j, "actions"), "actions", std::size_t(H));
        const json& rw = field(j, "rewards");
        if (!rw.is_array() || rw.size() != std::size_t(H))
            throw ParseError("\"rewards\" must be an array of length " + std::to_string(H), lineno);
        ep.rewards.resize(std::size_t(H));
        for (std::size_t i = 0; i < std::size_t(H); ++i) {
            if (!rw[i].is_number()) throw ParseError("\"rewards\" entries must be numbers", lineno);
            ep.rewards[i] = rw[i].get<double>();
        }
        data.episodes.push_back(std::move(ep));
    }
    if (H < 0) throw ParseError("empty dataset file (missing header line)", 1);
    return data;
}

void save_dataset(const EpisodeDataset& data, const std::string& path) {
    write_text_file(path, serialize_dataset(data));
}

EpisodeDataset load_dataset(const std::string& path) { return parse_dataset(read_text_file(path)); }

}  // namespace polyfine
