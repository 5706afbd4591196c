#include "sndh/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sndh::io {

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Eigen::VectorXd vector_from(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

Eigen::MatrixXd matrix_from(const Json& j, Eigen::Index cols_if_empty = 0) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : cols_if_empty;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

Json to_json(const Instance& inst) {
  Json commodities = Json::array();
  for (const auto& k : inst.commodities)
    commodities.push_back({{"origin", k.origin},
                           {"avail_period", k.avail_period},
                           {"destination", k.destination},
                           {"deadline", k.deadline}});
  return {{"num_terminals", inst.num_terminals},
          {"horizon", inst.horizon},
          {"capacity", inst.capacity},
          {"outsourcing_cost", inst.outsourcing_cost},
          {"arc_cost", matrix_json(inst.arc_cost)},
          {"commodities", commodities}};
}

Instance instance_from_json(const Json& j) {
  Instance inst;
  inst.num_terminals = j.at("num_terminals").get<int>();
  inst.horizon = j.at("horizon").get<int>();
  inst.capacity = j.at("capacity").get<double>();
  inst.outsourcing_cost = j.at("outsourcing_cost").get<double>();
  inst.arc_cost = matrix_from(j.at("arc_cost"));
  for (const auto& k : j.at("commodities"))
    inst.commodities.push_back({k.at("origin").get<int>(), k.at("avail_period").get<int>(),
                                k.at("destination").get<int>(), k.at("deadline").get<int>()});
  inst.validate();
  return inst;
}

Json to_json(const ScenarioSet& scens) {
  return {{"seed", scens.seed},
          {"probabilities", vector_json(scens.probabilities)},
          {"demands", matrix_json(scens.demands)}};
}

ScenarioSet scenarios_from_json(const Json& j) {
  ScenarioSet s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.probabilities = vector_from(j.at("probabilities"));
  s.demands = matrix_from(j.at("demands"));
  if (s.demands.rows() != s.probabilities.size())
    throw std::invalid_argument("scenario file: one probability per demand row required");
  s.validate();
  return s;
}

Json to_json(const BundleFile& file) {
  Json j = {{"method", file.method},
            {"config", file.config},
            {"bundles", file.bundles.bundles},
            {"bundle_prob", vector_json(file.bundles.bundle_prob)},
            {"scenario_q", vector_json(file.bundles.reweighted_prob)}};
  if (file.membership) j["membership"] = matrix_json(*file.membership);
  return j;
}

BundleFile bundle_file_from_json(const Json& j) {
  BundleFile file;
  file.method = j.at("method").get<std::string>();
  if (file.method != "fcm" && file.method != "kmeans")
    throw std::invalid_argument("bundle file: method must be fcm or kmeans, got " + file.method);
  file.config = j.at("config");
  auto& b = file.bundles;
  b.bundles = j.at("bundles").get<std::vector<std::vector<int>>>();
  b.bundle_prob = vector_from(j.at("bundle_prob"));
  b.reweighted_prob = vector_from(j.at("scenario_q"));
  b.occurrence_count.assign(static_cast<std::size_t>(b.reweighted_prob.size()), 0);
  for (const auto& members : b.bundles)
    for (int s : members) {
      if (s < 0 || s >= b.num_scenarios()) throw std::invalid_argument("bundle file: scenario index out of range");
      ++b.occurrence_count[static_cast<std::size_t>(s)];
    }
  b.validate();
  if (j.contains("membership")) file.membership = matrix_from(j.at("membership"));
  return file;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace sndh::io
