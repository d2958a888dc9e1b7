#include "swnet/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "swnet/error.hpp"

namespace swnet {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

StepResult apply_service(const NetworkModel& model, std::span<const double> q,
                         std::span<const double> service, std::span<const double> dA) {
  const std::size_t n = model.n_queues;
  StepResult r;
  r.dB.assign(service.begin(), service.end());
  r.dY.assign(n, 0.0);
  r.q_next.assign(n, 0.0);
  Vec moved(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    r.dY[k] = std::max(service[k] - q[k], 0.0);
    // Q - (dB - dY) written so that single-hop reduces to [Q - dB]^+ exactly.
    r.q_next[k] = std::max(q[k] - service[k], 0.0);
    moved[k] = q[k] - r.q_next[k];
  }
  if (model.hop_kind == HopKind::kMulti) {
    for (std::size_t k = 0; k < n; ++k) {
      if (moved[k] == 0.0) continue;
      if (auto d = model.downstream(k)) r.q_next[*d] += moved[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    r.q_next[k] += dA[k];
    if (r.q_next[k] < 0.0) throw Error(ErrorCode::kNegativeQueue, "negative queue after step");
  }
  return r;
}

StepResult apply_schedule(const NetworkModel& model, std::span<const double> q,
                          std::size_t schedule, std::span<const double> dA) {
  StepResult r = apply_service(model, q, model.schedules[schedule], dA);
  r.chosen = schedule;
  return r;
}

StepResult step(const NetworkModel& model, const Policy& policy, std::span<const double> q,
                std::span<const double> dA, TieState& ties) {
  const SelectionTrace t = select_schedule(model, policy, q, ties);
  return apply_schedule(model, q, t.chosen, dA);
}

SystemPath run(const NetworkModel& model, const Policy& policy, const ArrivalModel& arrivals,
               const Vec& q0, std::uint64_t horizon, std::uint64_t seed, const RunOptions& opts) {
  const std::size_t n = model.n_queues;
  if (q0.size() != n || arrivals.dim() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "q0 / arrivals do not match the model");
  }
  for (double x : q0) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::kNegativeQueue, "initial queue must be finite and >= 0");
    }
  }
  check_policy_model(model, policy);
  const std::uint64_t stride = std::max<std::uint64_t>(opts.stride, 1);

  SystemPath p;
  p.model = model;
  p.meta = {model.name, policy.describe(), to_string(arrivals.kind), seed, stride};

  ArrivalStream stream(arrivals, derive_seed(seed, {0}));
  TieState ties(opts.tie_seed.value_or(derive_seed(seed, {1})));
  std::vector<CompensatedSum> a(n), b(n), y(n);
  std::vector<std::uint64_t> s_cum(model.schedules.size(), 0);
  Vec q = q0;

  auto record = [&](std::uint64_t tau) {
    p.taus.push_back(tau);
    p.Q.push_back(q);
    Vec av(n), bv(n), yv(n);
    for (std::size_t k = 0; k < n; ++k) {
      av[k] = a[k].value();
      bv[k] = b[k].value();
      yv[k] = y[k].value();
    }
    p.A.push_back(std::move(av));
    p.B.push_back(std::move(bv));
    p.Y.push_back(std::move(yv));
    p.S_cum.push_back(s_cum);
    p.chosen.push_back(-1);
  };

  p.sup_q = sup_norm(q);
  record(0);
  for (std::uint64_t tau = 0; tau < horizon; ++tau) {
    const Vec& da = stream.next();
    StepResult r = step(model, policy, q, da, ties);
    if (tau % stride == 0) p.chosen.back() = static_cast<std::int64_t>(r.chosen);
    for (std::size_t k = 0; k < n; ++k) {
      a[k].add(da[k]);
      b[k].add(r.dB[k]);
      y[k].add(r.dY[k]);
    }
    ++s_cum[r.chosen];
    q = std::move(r.q_next);
    p.sup_q = std::max(p.sup_q, sup_norm(q));
    if ((tau + 1) % stride == 0 || tau + 1 == horizon) record(tau + 1);
  }
  return p;
}

namespace {

double rel_gap(double lhs, double rhs, double scale) {
  return std::abs(lhs - rhs) / (1.0 + scale);
}

}  // namespace

AuditReport conservation_audit(const SystemPath& path, std::size_t pair_samples) {
  constexpr double kTol = 1e-9;
  AuditReport rep;
  const NetworkModel& model = path.model;
  const std::size_t n = model.n_queues;
  const std::size_t rows = path.rows();
  if (rows == 0) return rep;
  auto flag = [&](std::uint64_t tau, std::string check, double mag) {
    rep.violations.push_back({tau, std::move(check), mag});
  };

  for (std::size_t k = 0; k < n; ++k) {
    if (path.A[0][k] != 0.0 || path.B[0][k] != 0.0 || path.Y[0][k] != 0.0) {
      flag(path.taus[0], "initial cumulative state nonzero", 1.0);
      break;
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    const std::uint64_t tau = path.taus[i];
    const Vec& Q = path.Q[i];
    const Vec& A = path.A[i];
    const Vec& B = path.B[i];
    const Vec& Y = path.Y[i];
    // Net outflow (I - R^T)(B - Y); zero routing gives B - Y.
    Vec served(n);
    for (std::size_t k = 0; k < n; ++k) served[k] = B[k] - Y[k];
    const Vec out = net_outflow(model, served);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double rhs = path.Q[0][k] + A[k] - out[k];
      const double scale = std::max({std::abs(path.Q[0][k]), A[k], B[k], Y[k]});
      worst = std::max(worst, rel_gap(Q[k], rhs, scale));
    }
    if (worst > kTol) {
      flag(tau, model.hop_kind == HopKind::kSingle ? "Q = Q0 + A - B + Y" : "Q = Q0 + A - (I-R^T)(B-Y)",
           worst);
    }

    std::uint64_t used = 0;
    Vec b_from_s(n, 0.0);
    for (std::size_t s = 0; s < model.schedules.size(); ++s) {
      used += path.S_cum[i][s];
      for (std::size_t k = 0; k < n; ++k) {
        b_from_s[k] += static_cast<double>(path.S_cum[i][s]) * model.schedules[s][k];
      }
    }
    double gap = 0.0;
    for (std::size_t k = 0; k < n; ++k) gap = std::max(gap, rel_gap(B[k], b_from_s[k], B[k]));
    if (gap > kTol) flag(tau, "B = sum_pi S_pi pi", gap);
    if (used != tau) flag(tau, "one schedule per slot", std::abs(double(used) - double(tau)));

    for (std::size_t k = 0; k < n; ++k) {
      if (Q[k] < 0.0) {
        flag(tau, "Q >= 0", -Q[k]);
        break;
      }
    }
    if (i > 0) {
      const std::size_t j = i - 1;
      for (std::size_t k = 0; k < n; ++k) {
        if (Y[k] < path.Y[j][k] || A[k] < path.A[j][k] || B[k] < path.B[j][k]) {
          flag(tau, "cumulative processes nondecreasing",
               std::max({path.Y[j][k] - Y[k], path.A[j][k] - A[k], path.B[j][k] - B[k]}));
          break;
        }
      }
      for (std::size_t s = 0; s < model.schedules.size(); ++s) {
        if (path.S_cum[i][s] < path.S_cum[j][s]) {
          flag(tau, "S_pi nondecreasing", 1.0);
          break;
        }
      }
      // A slot with dY_n > 0 must have had Q_n < dB_n; only checkable on consecutive rows.
      if (path.taus[i] == path.taus[j] + 1) {
        for (std::size_t k = 0; k < n; ++k) {
          const double dy = Y[k] - path.Y[j][k];
          const double db = B[k] - path.B[j][k];
          if (dy > kTol * (1.0 + Y[k]) && !(path.Q[j][k] < db + kTol * (1.0 + db))) {
            flag(path.taus[j], "idling only when Q < dB", dy);
            break;
          }
        }
      }
    }
    ++rep.rows_checked;
  }

  // Growth bound over pairs tau' <= tau: consecutive rows, (0, tau) and sampled pairs.
  auto check_pair = [&](std::size_t j, std::size_t i) {
    ++rep.pairs_checked;
    for (std::size_t k = 0; k < n; ++k) {
      double bound = path.Q[j][k] + path.A[i][k] - path.A[j][k];
      for (std::size_t m = 0; m < n; ++m) {
        if (model.routing(m, k)) bound += path.B[i][m] - path.B[j][m];
      }
      const double scale = std::max({std::abs(bound), path.A[i][k], path.B[i][k]});
      if (path.Q[i][k] > bound + kTol * (1.0 + scale)) {
        flag(path.taus[i], "growth bound from tau=" + std::to_string(path.taus[j]),
             path.Q[i][k] - bound);
        return;
      }
    }
  };
  for (std::size_t i = 1; i < rows; ++i) {
    check_pair(i - 1, i);
    check_pair(0, i);
  }
  Rng rng(0x5eedULL);
  if (rows > 2) {
    for (std::size_t s = 0; s < pair_samples; ++s) {
      std::size_t i = rng.index(rows);
      std::size_t j = rng.index(rows);
      if (j > i) std::swap(i, j);
      check_pair(j, i);
    }
  }
  std::stable_sort(rep.violations.begin(), rep.violations.end(),
                   [](const AuditViolation& x, const AuditViolation& y) { return x.tau < y.tau; });
  return rep;
}

void write_csv(std::ostream& out, const SystemPath& path) {
  const std::size_t n = path.model.n_queues;
  out << "tau";
  for (const char* p : {"q", "a", "b", "y"}) {
    for (std::size_t k = 1; k <= n; ++k) out << ',' << p << '_' << k;
  }
  out << ",chosen_schedule\n";
  for (std::size_t i = 0; i < path.rows(); ++i) {
    out << path.taus[i];
    for (const auto* series : {&path.Q, &path.A, &path.B, &path.Y}) {
      for (double x : (*series)[i]) out << ',' << format_double(x);
    }
    out << ',' << path.chosen[i] << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kSchemaError, "bad number '" + s + "' on CSV line " + std::to_string(line));
  }
  return v;
}

}  // namespace

SystemPath read_csv(std::istream& in, const NetworkModel& model) {
  const std::size_t n = model.n_queues;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kSchemaError, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() != 4 * n + 2 || header.front() != "tau" || header.back() != "chosen_schedule") {
    throw Error(ErrorCode::kSchemaError, "CSV header does not match a " + std::to_string(n) +
                                             "-queue trajectory");
  }
  SystemPath p;
  p.model = model;
  std::vector<std::uint64_t> s_cum(model.schedules.size(), 0);
  std::size_t lineno = 1;
  std::int64_t prev_chosen = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kSchemaError, "CSV line " + std::to_string(lineno) + " has " +
                                               std::to_string(cells.size()) + " cells");
    }
    const std::uint64_t tau = static_cast<std::uint64_t>(parse_cell(cells[0], lineno));
    if (!p.taus.empty()) {
      // Rebuild schedule counts from the previous row's choice; gaps are attributed to it.
      const std::uint64_t gap = tau - p.taus.back();
      if (prev_chosen >= 0 && static_cast<std::size_t>(prev_chosen) < s_cum.size()) {
        s_cum[static_cast<std::size_t>(prev_chosen)] += gap;
      }
    }
    p.taus.push_back(tau);
    std::vector<Vec> parts(4, Vec(n));
    for (std::size_t s = 0; s < 4; ++s) {
      for (std::size_t k = 0; k < n; ++k) parts[s][k] = parse_cell(cells[1 + s * n + k], lineno);
    }
    p.Q.push_back(parts[0]);
    p.A.push_back(parts[1]);
    p.B.push_back(parts[2]);
    p.Y.push_back(parts[3]);
    p.S_cum.push_back(s_cum);
    prev_chosen = static_cast<std::int64_t>(parse_cell(cells.back(), lineno));
    p.chosen.push_back(prev_chosen);
    p.sup_q = std::max(p.sup_q, sup_norm(parts[0]));
  }
  if (p.taus.empty()) throw Error(ErrorCode::kSchemaError, "CSV has no rows");
  p.meta.model = model.name;
  p.meta.stride = p.taus.size() > 1 ? p.taus[1] - p.taus[0] : 1;
  return p;
}

namespace {

Vec interpolate(const std::vector<std::uint64_t>& taus, const std::vector<Vec>& xs, double s) {
  auto it = std::upper_bound(taus.begin(), taus.end(), s,
                             [](double v, std::uint64_t t) { return v < static_cast<double>(t); });
  if (it == taus.begin()) return xs.front();
  if (it == taus.end()) return xs.back();
  const std::size_t hi = static_cast<std::size_t>(it - taus.begin());
  const std::size_t lo = hi - 1;
  const double t0 = static_cast<double>(taus[lo]);
  const double t1 = static_cast<double>(taus[hi]);
  const double w = (s - t0) / (t1 - t0);
  Vec out(xs[lo].size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = xs[lo][k] + w * (xs[hi][k] - xs[lo][k]);
  return out;
}

}  // namespace

ScaledPath rescale(const SystemPath& path, ScaleKind kind, double scale, double T,
                   std::size_t points) {
  if (!(scale >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "scale must be >= 1");
  if (points < 2) points = 2;
  const double time_factor = kind == ScaleKind::kFluid ? scale : scale * scale;
  const double need = time_factor * T;
  if (static_cast<double>(path.horizon()) + 1e-9 * need < need) {
    throw Error(ErrorCode::kHorizonTooShort, "run covers " + std::to_string(path.horizon()) +
                                                 " slots, need " + format_double(need));
  }
  ScaledPath sp;
  sp.kind = kind;
  sp.scale = scale;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(points - 1);
    const double s = std::min(time_factor * t, static_cast<double>(path.horizon()));
    sp.t.push_back(t);
    sp.q.push_back(scaled(interpolate(path.taus, path.Q, s), 1.0 / scale));
    if (kind == ScaleKind::kFluid) {
      sp.a.push_back(scaled(interpolate(path.taus, path.A, s), 1.0 / scale));
      sp.b.push_back(scaled(interpolate(path.taus, path.B, s), 1.0 / scale));
      sp.y.push_back(scaled(interpolate(path.taus, path.Y, s), 1.0 / scale));
    }
  }
  return sp;
}

}  // namespace swnet
