#include "logz/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace logz {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no infinities; they become null.
nlohmann::json jnum(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json phase_json(const PhaseParams& ph) {
  return {{"i", ph.index}, {"k", ph.chunk},   {"sigma2", ph.sigma2}, {"a", ph.a},
          {"m_i", ph.m},   {"L_i", ph.L},     {"kappa_i", ph.kappa}, {"gamma", ph.gamma},
          {"n", ph.n},     {"N", ph.burn_in}};
}

}  // namespace

std::string schedule_csv(const Schedule& s) {
  std::ostringstream os;
  os << "i,k,sigma2,a,m_i,L_i,kappa_i,gamma,n,N\n";
  for (const auto& ph : s.phases) {
    os << ph.index << ',' << ph.chunk << ',' << num(ph.sigma2) << ',' << num(ph.a) << ',' << num(ph.m) << ','
       << num(ph.L) << ',' << num(ph.kappa) << ',' << num(ph.gamma) << ',' << num(ph.n) << ','
       << num(ph.burn_in) << '\n';
  }
  return os.str();
}

std::string schedule_json(const Schedule& s) {
  nlohmann::json j;
  j["regime"] = std::string(to_string(s.regime));
  j["preset"] = std::string(to_string(s.preset));
  j["a3"] = s.use_hessian_lipschitz;
  j["stride"] = s.stride;
  j["dim"] = s.dim;
  j["m"] = s.m;
  j["L"] = s.L;
  j["eps"] = s.eps;
  j["mu"] = s.mu;
  j["eta"] = s.eta;
  j["sigma2_0"] = s.sigma2_0;
  j["threshold"] = s.threshold;
  j["M"] = s.M();
  j["K"] = s.K;
  if (s.truncation) j["truncation"] = {{"tau", s.truncation->tau}, {"D", s.truncation->D}};
  double cost = 0.0;
  nlohmann::json phases = nlohmann::json::array();
  for (const auto& ph : s.phases) {
    phases.push_back(phase_json(ph));
    cost += ph.n + ph.burn_in;
  }
  j["cost"] = cost;
  j["phases"] = std::move(phases);
  return j.dump(2) + "\n";
}

std::string result_json(const EstimateResult& r, const std::string& digest) {
  nlohmann::json j;
  j["log_z_hat"] = jnum(r.log_z_hat);
  j["log_evidence"] = jnum(r.log_evidence);
  nlohmann::json ratios = nlohmann::json::array();
  for (double v : r.per_phase_log_ratios) ratios.push_back(jnum(v));
  j["per_phase_log_ratios"] = std::move(ratios);
  j["cost"] = r.cost;
  j["seed"] = r.seed;
  j["replicate"] = r.replicate;
  j["phases"] = r.phases;
  j["closed_form"] = r.closed_form;
  j["config_digest"] = digest;
  if (!r.replicate_log_z.empty()) {
    nlohmann::json reps = nlohmann::json::array();
    for (double v : r.replicate_log_z) reps.push_back(jnum(v));
    j["replicates"] = std::move(reps);
  }
  return j.dump(2) + "\n";
}

std::string result_csv(const EstimateResult& r, const std::string& digest) {
  std::ostringstream os;
  os << "log_z_hat,log_evidence,cost,seed,replicate,phases,config_digest\n";
  os << num(r.log_z_hat) << ',' << num(r.log_evidence) << ',' << r.cost << ',' << r.seed << ',' << r.replicate
     << ',' << r.phases << ',' << digest << '\n';
  return os.str();
}

std::string replicate_csv(const ReplicateTable& t, const std::vector<std::optional<MseBoundEntry>>& bounds) {
  std::ostringstream os;
  const bool with_bounds = !bounds.empty();
  os << "phase,mean,std,log_ratio_mean,log_ratio_std";
  if (with_bounds) os << ",bias_bound,var_bound,mse_bound";
  os << '\n';
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    os << r.phase << ',' << num(r.mean) << ',' << num(r.std) << ',' << num(r.log_ratio_mean) << ','
       << num(r.log_ratio_std);
    if (with_bounds) {
      if (i < bounds.size() && bounds[i]) {
        os << ',' << num(std::sqrt(bounds[i]->bias2)) << ',' << num(bounds[i]->variance) << ','
           << num(bounds[i]->mse);
      } else {
        os << ",nan,nan,nan";
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string replicate_json(const ReplicateTable& t, const std::string& digest) {
  nlohmann::json j;
  j["config_digest"] = digest;
  j["cost"] = t.cost;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"phase", r.phase},
                    {"mean", jnum(r.mean)},
                    {"std", jnum(r.std)},
                    {"log_ratio_mean", jnum(r.log_ratio_mean)},
                    {"log_ratio_std", jnum(r.log_ratio_std)}});
  }
  j["phases"] = std::move(rows);
  nlohmann::json lz = nlohmann::json::array();
  for (double v : t.log_z) lz.push_back(jnum(v));
  j["log_z_hat"] = std::move(lz);
  nlohmann::json le = nlohmann::json::array();
  for (double v : t.log_evidence) le.push_back(jnum(v));
  j["log_evidence"] = std::move(le);
  return j.dump(2) + "\n";
}

}  // namespace logz
