#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logz/diagnostics.hpp"
#include "logz/estimator.hpp"
#include "logz/schedule.hpp"

namespace logz {

/// Header i,k,sigma2,a,m_i,L_i,kappa_i,gamma,n,N; one row per phase, k = -1
/// for the final phase, reals at 17 significant digits.
std::string schedule_csv(const Schedule& schedule);
/// Same rows under "phases" plus regime metadata.
std::string schedule_json(const Schedule& schedule);

/// {log_z_hat, log_evidence, per_phase_log_ratios, cost, seed, config_digest, ...}
std::string result_json(const EstimateResult& result, const std::string& config_digest);
/// Header plus one row; replicate values are not included.
std::string result_csv(const EstimateResult& result, const std::string& config_digest);

/// phase,mean,std,log_ratio_mean,log_ratio_std[,bias_bound,var_bound,mse_bound]
std::string replicate_csv(const ReplicateTable& table, const std::vector<std::optional<MseBoundEntry>>& bounds = {});
std::string replicate_json(const ReplicateTable& table, const std::string& config_digest);

}  // namespace logz
