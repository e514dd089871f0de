#pragma once

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>

#include "entwit/hash.hpp"
#include "entwit/svm.hpp"

namespace entwit::svm {

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json to_json(const SvmModel& m) {
  nlohmann::json support = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.support_count(); ++i) {
    std::vector<double> f(m.support.row(i).data(), m.support.row(i).data() + m.support.cols());
    support.push_back({{"signed_alpha", m.signed_alphas(i)}, {"features", std::move(f)}});
  }
  return {
      {"version", kModelFormatVersion},
      {"n_qubits", m.n_qubits},
      {"degree", m.degree},
      {"feature_dimension", m.feature_dimension()},
      {"lambda_plus", m.lambda_plus},
      {"lambda_minus", m.lambda_minus},
      {"bias", m.bias},
      {"support", std::move(support)},
      {"training",
       {{"seed", m.training.seed},
        {"dataset_hash", m.training.dataset_hash},
        {"config_hash", m.training.config_hash},
        {"kkt_residual", m.training.kkt_residual},
        {"iterations", m.training.iterations},
        {"converged", m.training.converged},
        {"dual_objective", m.training.dual_objective}}},
  };
}

inline SvmModel model_from_json(const nlohmann::json& j) {
  if (j.at("version").get<int>() != kModelFormatVersion) throw std::runtime_error("unsupported model version");
  SvmModel m;
  m.n_qubits = j.at("n_qubits").get<int>();
  m.degree = j.at("degree").get<int>();
  m.lambda_plus = j.at("lambda_plus").get<double>();
  m.lambda_minus = j.at("lambda_minus").get<double>();
  m.bias = j.at("bias").get<double>();
  const auto& sv = j.at("support");
  const auto d = j.contains("feature_dimension") ? j.at("feature_dimension").get<Eigen::Index>()
                 : sv.empty()                    ? Eigen::Index{0}
                                                 : static_cast<Eigen::Index>(sv.front().at("features").size());
  m.support.resize(static_cast<Eigen::Index>(sv.size()), d);
  m.signed_alphas.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t i = 0; i < sv.size(); ++i) {
    const auto f = sv[i].at("features").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(f.size()) != d) throw std::runtime_error("model support vector has wrong length");
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < d; ++k) m.support(r, k) = f[static_cast<std::size_t>(k)];
    m.signed_alphas(r) = sv[i].at("signed_alpha").get<double>();
  }
  if (j.contains("training")) {
    const auto& t = j.at("training");
    m.training.seed = t.value("seed", std::uint64_t{0});
    m.training.dataset_hash = t.value("dataset_hash", std::string{});
    m.training.config_hash = t.value("config_hash", std::string{});
    m.training.kkt_residual = t.value("kkt_residual", 0.0);
    m.training.iterations = t.value("iterations", 0L);
    m.training.converged = t.value("converged", false);
    m.training.dual_objective = t.value("dual_objective", 0.0);
  }
  return m;
}

inline std::string serialize_model(const SvmModel& m) { return to_json(m).dump(1) + "\n"; }

inline std::uint64_t model_hash(const SvmModel& m) { return fnv1a(serialize_model(m)); }

inline void save_model(const SvmModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << serialize_model(m);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline SvmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace entwit::svm
