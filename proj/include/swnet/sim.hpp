#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "swnet/arrivals.hpp"
#include "swnet/net_model.hpp"
#include "swnet/policy.hpp"
#include "swnet/vec.hpp"

namespace swnet {

struct StepResult {
  Vec q_next;
  Vec dB;
  Vec dY;
  std::size_t chosen = 0;
};

/// Serve `service`, route the served work downstream, then add dA. Idling is
/// [service - q]^+.
StepResult apply_service(const NetworkModel& model, std::span<const double> q,
                         std::span<const double> service, std::span<const double> dA);

/// One slot with a given schedule.
StepResult apply_schedule(const NetworkModel& model, std::span<const double> q,
                          std::size_t schedule, std::span<const double> dA);

/// One slot with the schedule chosen by the policy on q.
StepResult step(const NetworkModel& model, const Policy& policy, std::span<const double> q,
                std::span<const double> dA, TieState& ties);

struct PathMeta {
  std::string model;
  std::string policy;
  std::string arrivals;
  std::uint64_t seed = 0;
  std::uint64_t stride = 1;
};

/// Cumulative trajectories of one discrete run. Row k holds slot taus[k]; with stride 1
/// every slot is stored. chosen[k] is the schedule used in slot taus[k] (-1 on the final
/// row).
struct SystemPath {
  NetworkModel model;
  std::vector<std::uint64_t> taus;
  std::vector<Vec> Q, A, B, Y;
  std::vector<std::vector<std::uint64_t>> S_cum;
  std::vector<std::int64_t> chosen;
  /// sup over every simulated slot (not only stored rows) of |Q(tau)|.
  double sup_q = 0.0;
  PathMeta meta;

  std::uint64_t horizon() const { return taus.empty() ? 0 : taus.back(); }
  std::size_t rows() const { return taus.size(); }
};

struct RunOptions {
  std::uint64_t stride = 1;
  /// Stream seed for random tie-breaking; defaults to a derivation of the arrival seed.
  std::optional<std::uint64_t> tie_seed;
};

SystemPath run(const NetworkModel& model, const Policy& policy, const ArrivalModel& arrivals,
               const Vec& q0, std::uint64_t horizon, std::uint64_t seed,
               const RunOptions& opts = {});

struct AuditViolation {
  std::uint64_t tau = 0;
  std::string check;
  double magnitude = 0.0;
};

struct AuditReport {
  std::size_t rows_checked = 0;
  std::size_t pairs_checked = 0;
  std::vector<AuditViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Cumulative identities, B = sum S_pi pi, monotonicity, one schedule per slot and the
/// pairwise growth bound on queues. Never throws on violations.
AuditReport conservation_audit(const SystemPath& path, std::size_t pair_samples = 2000);

/// Header tau,q_1..q_N,a_1..a_N,b_1..b_N,y_1..y_N,chosen_schedule. Numbers are shortest
/// round-trip decimals, so import reproduces the path exactly.
void write_csv(std::ostream& out, const SystemPath& path);
/// Rebuilds a path for `model` from CSV; S_cum is recovered from chosen_schedule.
SystemPath read_csv(std::istream& in, const NetworkModel& model);

enum class ScaleKind { kFluid, kDiffusion };

/// Uniform time grid view. Fluid: x(t) = X(z t) / z for q, a, b, y. Diffusion:
/// q(t) = Q(r^2 t) / r, only q populated.
struct ScaledPath {
  ScaleKind kind = ScaleKind::kFluid;
  double scale = 1.0;
  Vec t;
  std::vector<Vec> q, a, b, y;
};

/// Linear interpolation between stored slots. Throws HorizonTooShort when the run does
/// not cover the requested time T.
ScaledPath rescale(const SystemPath& path, ScaleKind kind, double scale, double T,
                   std::size_t points);

std::string format_double(double x);

}  // namespace swnet
