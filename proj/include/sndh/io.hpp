#pragma once

#include "sndh/bundling.hpp"
#include "sndh/network.hpp"
#include "sndh/scenarios.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace sndh::io {

using Json = nlohmann::json;

Json to_json(const Instance& inst);
Instance instance_from_json(const Json& j);

Json to_json(const ScenarioSet& scens);
ScenarioSet scenarios_from_json(const Json& j);

/// Contents of a bundle file.
struct BundleFile {
  std::string method;  // "fcm" or "kmeans"
  Json config;         // parameters echoed as given
  BundleSet bundles;
  std::optional<Eigen::MatrixXd> membership;  // FCM only, |S| x g
};

Json to_json(const BundleFile& file);
BundleFile bundle_file_from_json(const Json& j);

/// Throws std::runtime_error naming the path when it cannot be read or parsed.
Json read_json(const std::filesystem::path& path);

/// Two-space indentation with a trailing newline. Keys come out sorted, so
/// read-then-write reproduces a file byte for byte.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace sndh::io
