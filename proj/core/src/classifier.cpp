#include "casa/classifier.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "casa/errors.hpp"

namespace casa {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kStdFloor = 1e-9;

}  // namespace

SourceModelSet train_source_models(
    const std::map<std::string, Eigen::MatrixXd>& frames_per_class,
    const ClassifierTrainConfig& cfg) {
  SourceModelSet set;
  for (const auto& [label, frames] : frames_per_class) {
    if (frames.rows() < cfg.min_frames()) {
      throw TrainingError("train_source_models: class '" + label + "' has " +
                          std::to_string(frames.rows()) + " frames, need " +
                          std::to_string(cfg.min_frames()));
    }
    SourceModel model;
    model.label = label;
    model.norm_mean = frames.colwise().mean();
    Eigen::VectorXd var =
        (frames.rowwise() - model.norm_mean.transpose()).array().square().colwise().mean();
    model.norm_std = var.array().sqrt().max(kStdFloor);

    Eigen::MatrixXd z = (frames.rowwise() - model.norm_mean.transpose()).array().rowwise() /
                        model.norm_std.transpose().array();
    model.gmm = Gmm::fit(z, cfg.num_components, cfg.seed, cfg.gmm);
    set.models.push_back(std::move(model));
  }
  return set;
}

std::vector<double> frame_posterior(const SpectralFeatureVector& features,
                                    const SourceModelSet& models, bool* degenerate) {
  const int s_count = models.num_classes();
  const auto raw = features.as_array();
  std::vector<double> logp(s_count, kNegInf);
  double max_log = kNegInf;
  for (int s = 0; s < s_count; ++s) {
    const auto& m = models.models[s];
    Eigen::VectorXd x(7);
    for (int i = 0; i < 7; ++i) x[i] = (raw[i] - m.norm_mean[i]) / m.norm_std[i];
    logp[s] = m.gmm.log_likelihood(x);  // uniform class prior cancels
    max_log = std::max(max_log, logp[s]);
  }
  if (!std::isfinite(max_log)) {
    if (degenerate) *degenerate = true;
    return std::vector<double>(s_count, 1.0 / s_count);
  }
  if (degenerate) *degenerate = false;
  double sum = 0.0;
  for (double& p : logp) {
    p = std::exp(p - max_log);
    sum += p;
  }
  for (double& p : logp) p /= sum;
  return logp;
}

BlockDecision classify_block(const std::vector<SpectralFeatureVector>& frames,
                             const SourceModelSet& models) {
  const int s_count = models.num_classes();
  BlockDecision decision;
  decision.averaged_posterior.assign(s_count, 0.0);
  int used = 0;
  for (const auto& frame : frames) {
    if (frame.degenerate) continue;
    const auto post = frame_posterior(frame, models);
    for (int s = 0; s < s_count; ++s) decision.averaged_posterior[s] += post[s];
    ++used;
  }
  if (used == 0) {
    decision.averaged_posterior.assign(s_count, 1.0 / s_count);
    return decision;  // no decision
  }
  for (double& p : decision.averaged_posterior) p /= used;
  decision.class_index = 0;
  for (int s = 1; s < s_count; ++s) {
    if (decision.averaged_posterior[s] > decision.averaged_posterior[decision.class_index]) {
      decision.class_index = s;
    }
  }
  return decision;
}

void SourceModelSet::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "casa-source-models";
  j["version"] = 1;
  j["config_hash"] = config_hash;
  auto& jc = j["classes"];
  jc = nlohmann::json::array();
  for (const auto& m : models) {
    nlohmann::json e;
    e["label"] = m.label;
    e["norm_mean"] = std::vector<double>(m.norm_mean.data(), m.norm_mean.data() + 7);
    e["norm_std"] = std::vector<double>(m.norm_std.data(), m.norm_std.data() + 7);
    e["weights"] = m.gmm.weights();
    auto& means = e["means"];
    auto& covs = e["covariances"];
    for (int c = 0; c < m.gmm.num_components(); ++c) {
      const auto& mu = m.gmm.means()[c];
      means.push_back(std::vector<double>(mu.data(), mu.data() + mu.size()));
      const auto& cov = m.gmm.covariances()[c];
      std::vector<double> flat(cov.data(), cov.data() + cov.size());
      covs.push_back(flat);
    }
    jc.push_back(std::move(e));
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot write models file: " + path);
  os << j.dump();
}

SourceModelSet SourceModelSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open models file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed models file: " + path + ": " + e.what());
  }
  if (j.value("format", "") != "casa-source-models") {
    throw IoError("not a source model file: " + path);
  }
  SourceModelSet set;
  set.config_hash = j.at("config_hash").get<std::uint64_t>();
  for (const auto& e : j.at("classes")) {
    SourceModel m;
    m.label = e.at("label");
    const auto nm = e.at("norm_mean").get<std::vector<double>>();
    const auto ns = e.at("norm_std").get<std::vector<double>>();
    m.norm_mean = Eigen::Map<const Eigen::VectorXd>(nm.data(), nm.size());
    m.norm_std = Eigen::Map<const Eigen::VectorXd>(ns.data(), ns.size());
    auto weights = e.at("weights").get<std::vector<double>>();
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covs;
    const int dim = static_cast<int>(e.at("means")[0].size());
    for (const auto& mu : e.at("means")) {
      const auto v = mu.get<std::vector<double>>();
      means.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    }
    for (const auto& cov : e.at("covariances")) {
      const auto v = cov.get<std::vector<double>>();
      covs.push_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), dim, dim));
    }
    m.gmm = Gmm::from_parameters(std::move(weights), std::move(means), std::move(covs));
    set.models.push_back(std::move(m));
  }
  return set;
}

}  // namespace casa
