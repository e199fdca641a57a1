#pragma once

#include <string>

#include "polyfine/episodes.hpp"
#include "polyfine/mdp.hpp"

namespace polyfine {

// File formats:
//   MDP    - one JSON document: {"S","A","H","initial","transitions","rewards"}
//            with transitions as [h][s][a][s'] and rewards as [h][s][a].
//   Policy - one JSON document: {"S","A","H","probs"} with probs as [h][s][a].
//   Dataset- JSON lines: a header {"H","behavior","seed"} followed by one
//            {"states","actions","rewards"} object per episode.
// Parsers validate what they load (validate_mdp, row distributions, shapes) and
// report malformed input as ParseError with a 1-based line where available.

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string serialize_mdp(const TabularMDP& mdp);
TabularMDP parse_mdp(const std::string& text);
void save_mdp(const TabularMDP& mdp, const std::string& path);
TabularMDP load_mdp(const std::string& path);

std::string serialize_policy(const Policy& policy);
Policy parse_policy(const std::string& text);
void save_policy(const Policy& policy, const std::string& path);
Policy load_policy(const std::string& path);

std::string serialize_dataset(const EpisodeDataset& data);
EpisodeDataset parse_dataset(const std::string& text);
void save_dataset(const EpisodeDataset& data, const std::string& path);
EpisodeDataset load_dataset(const std::string& path);

}  // namespace polyfine
