#include "swnet/arrivals.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "swnet/error.hpp"

namespace swnet {

std::string to_string(ArrivalKind kind) {
  switch (kind) {
    case ArrivalKind::kDeterministic: return "deterministic";
    case ArrivalKind::kBernoulli: return "bernoulli";
    case ArrivalKind::kIidBatch: return "iid_batch";
    case ArrivalKind::kMarkovModulated: return "markov_modulated";
  }
  return "?";
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, msg);
}

bool nonneg_finite(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

double ArrivalModel::a_max() const {
  double m = 0.0;
  switch (kind) {
    case ArrivalKind::kDeterministic:
      for (double x : rate) m = std::max(m, x);
      break;
    case ArrivalKind::kBernoulli:
      for (std::size_t n = 0; n < prob.size(); ++n) {
        if (prob[n] > 0.0) m = std::max(m, batch[n]);
      }
      break;
    case ArrivalKind::kIidBatch:
      for (const Vec& v : values) {
        for (double x : v) m = std::max(m, x);
      }
      break;
    case ArrivalKind::kMarkovModulated:
      for (const Vec& v : increments) {
        for (double x : v) m = std::max(m, x);
      }
      break;
  }
  return m;
}

ArrivalModel ArrivalModel::deterministic(Vec lambda) {
  for (double x : lambda) require(nonneg_finite(x), "arrival rate must be finite and >= 0");
  ArrivalModel a;
  a.kind = ArrivalKind::kDeterministic;
  a.rate = std::move(lambda);
  return a;
}

ArrivalModel ArrivalModel::bernoulli(Vec lambda) {
  Vec batch(lambda.size(), 1.0);
  return bernoulli(std::move(lambda), std::move(batch));
}

ArrivalModel ArrivalModel::bernoulli(Vec prob, Vec batch) {
  if (prob.size() != batch.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "bernoulli prob and batch differ in length");
  }
  ArrivalModel a;
  a.kind = ArrivalKind::kBernoulli;
  a.rate.resize(prob.size());
  for (std::size_t n = 0; n < prob.size(); ++n) {
    require(prob[n] >= 0.0 && prob[n] <= 1.0, "bernoulli probability must lie in [0,1]");
    require(nonneg_finite(batch[n]), "bernoulli batch must be finite and >= 0");
    a.rate[n] = prob[n] * batch[n];
  }
  a.prob = std::move(prob);
  a.batch = std::move(batch);
  return a;
}

ArrivalModel ArrivalModel::iid_batch(std::vector<Vec> values, std::vector<Vec> probs) {
  if (values.size() != probs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "iid_batch values and probs differ in length");
  }
  ArrivalModel a;
  a.kind = ArrivalKind::kIidBatch;
  a.rate.resize(values.size());
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (values[n].size() != probs[n].size() || values[n].empty()) {
      throw Error(ErrorCode::kDimensionMismatch, "iid_batch queue " + std::to_string(n + 1) +
                                                     " has mismatched support");
    }
    double mass = 0.0;
    double mean = 0.0;
    for (std::size_t k = 0; k < values[n].size(); ++k) {
      require(nonneg_finite(values[n][k]), "iid_batch values must be finite and >= 0");
      require(nonneg_finite(probs[n][k]), "iid_batch probabilities must be >= 0");
      mass += probs[n][k];
      mean += probs[n][k] * values[n][k];
    }
    require(std::abs(mass - 1.0) <= 1e-12, "iid_batch probabilities must sum to 1");
    a.rate[n] = mean;
  }
  a.values = std::move(values);
  a.probs = std::move(probs);
  return a;
}

ArrivalModel ArrivalModel::markov_modulated(std::vector<Vec> transition,
                                            std::vector<Vec> increments) {
  const std::size_t s = transition.size();
  require(s > 0, "markov_modulated needs at least one state");
  if (increments.size() != s) {
    throw Error(ErrorCode::kDimensionMismatch, "one increment vector per chain state required");
  }
  const std::size_t n = increments.front().size();
  for (std::size_t i = 0; i < s; ++i) {
    if (transition[i].size() != s) {
      throw Error(ErrorCode::kDimensionMismatch, "transition matrix must be square");
    }
    if (increments[i].size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "increment vectors differ in length");
    }
    double row = 0.0;
    for (double p : transition[i]) {
      require(nonneg_finite(p), "transition probabilities must be >= 0");
      row += p;
    }
    require(std::abs(row - 1.0) <= 1e-12, "transition rows must sum to 1");
    for (double x : increments[i]) require(nonneg_finite(x), "increments must be >= 0");
  }

  // Strongly connected transition graph: every state reaches 0 and is reached from 0.
  auto reach_all = [&](bool forward) {
    std::vector<char> seen(s, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < s; ++j) {
        const double p = forward ? transition[i][j] : transition[j][i];
        if (p > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::find(seen.begin(), seen.end(), 0) == seen.end();
  };
  require(reach_all(true) && reach_all(false), "transition matrix is not irreducible");

  // Stationary law: pi (P - I) = 0 with sum(pi) = 1, solved in least squares form.
  Eigen::MatrixXd a(s + 1, s);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s + 1);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      a(j, i) = transition[i][j] - (i == j ? 1.0 : 0.0);
    }
    a(s, i) = 1.0;
  }
  b(s) = 1.0;
  Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
  if ((a * pi - b).lpNorm<Eigen::Infinity>() > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "transition matrix is not irreducible");
  }
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    if (pi(i) < -1e-12) throw Error(ErrorCode::kInvalidArgument, "transition matrix is not irreducible");
  }

  ArrivalModel m;
  m.kind = ArrivalKind::kMarkovModulated;
  m.stationary.resize(s);
  for (std::size_t i = 0; i < s; ++i) m.stationary[i] = std::max(0.0, pi(static_cast<Eigen::Index>(i)));
  m.rate.assign(n, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t k = 0; k < n; ++k) m.rate[k] += m.stationary[i] * increments[i][k];
  }
  m.transition = std::move(transition);
  m.increments = std::move(increments);
  return m;
}

namespace {

std::size_t draw(Rng& rng, const Vec& probs) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  // Round-off: fall back to the last state with positive mass.
  for (std::size_t k = probs.size(); k-- > 0;) {
    if (probs[k] > 0.0) return k;
  }
  return 0;
}

}  // namespace

ArrivalStream::ArrivalStream(const ArrivalModel& model, std::uint64_t seed)
    : model_(&model), rng_(seed), buf_(model.dim(), 0.0) {
  if (model.kind == ArrivalKind::kMarkovModulated) state_ = draw(rng_, model.stationary);
}

const Vec& ArrivalStream::next() {
  const ArrivalModel& m = *model_;
  switch (m.kind) {
    case ArrivalKind::kDeterministic: {
      // lambda (tau + 1) - lambda tau keeps the cumulative sum on the exact line.
      const double t0 = static_cast<double>(tau_);
      const double t1 = static_cast<double>(tau_ + 1);
      for (std::size_t n = 0; n < buf_.size(); ++n) buf_[n] = m.rate[n] * t1 - m.rate[n] * t0;
      break;
    }
    case ArrivalKind::kBernoulli:
      for (std::size_t n = 0; n < buf_.size(); ++n) {
        buf_[n] = rng_.bernoulli(m.prob[n]) ? m.batch[n] : 0.0;
      }
      break;
    case ArrivalKind::kIidBatch:
      for (std::size_t n = 0; n < buf_.size(); ++n) buf_[n] = m.values[n][draw(rng_, m.probs[n])];
      break;
    case ArrivalKind::kMarkovModulated:
      buf_ = m.increments[state_];
      state_ = draw(rng_, m.transition[state_]);
      break;
  }
  ++tau_;
  return buf_;
}

std::vector<Vec> sample_increments(const ArrivalModel& model, std::uint64_t horizon,
                                   std::uint64_t seed) {
  const std::size_t n = model.dim();
  std::vector<Vec> path;
  path.reserve(horizon + 1);
  path.emplace_back(n, 0.0);
  ArrivalStream stream(model, seed);
  std::vector<CompensatedSum> acc(n);
  for (std::uint64_t tau = 0; tau < horizon; ++tau) {
    const Vec& da = stream.next();
    Vec row(n);
    for (std::size_t k = 0; k < n; ++k) {
      acc[k].add(da[k]);
      row[k] = acc[k].value();
    }
    path.push_back(std::move(row));
  }
  return path;
}

DeviationReport deviation_diagnostic(const ArrivalModel& model,
                                     const std::vector<std::uint64_t>& horizons, std::size_t reps,
                                     std::uint64_t seed, const Vec& delta) {
  if (horizons.empty()) throw Error(ErrorCode::kInvalidArgument, "horizons must be nonempty");
  if (!delta.empty() && delta.size() != horizons.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "delta must have one entry per horizon");
  }
  for (std::size_t i = 1; i < delta.size(); ++i) {
    if (delta[i] > delta[i - 1] && horizons[i] > horizons[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument, "delta sequence must be nonincreasing");
    }
  }
  if (reps == 0) reps = 1;

  DeviationReport rep;
  rep.horizons = horizons;
  const std::uint64_t zmax = *std::max_element(horizons.begin(), horizons.end());
  std::vector<Vec> per_rep(horizons.size(), Vec(reps, 0.0));
  for (std::size_t r = 0; r < reps; ++r) {
    const auto path = sample_increments(model, zmax, derive_seed(seed, {r}));
    for (std::size_t h = 0; h < horizons.size(); ++h) {
      const std::uint64_t z = horizons[h];
      double sup = 0.0;
      for (std::uint64_t tau = 0; tau <= z; ++tau) {
        for (std::size_t n = 0; n < model.dim(); ++n) {
          sup = std::max(sup, std::abs(path[tau][n] - model.rate[n] * static_cast<double>(tau)));
        }
      }
      per_rep[h][r] = z == 0 ? 0.0 : sup / static_cast<double>(z);
    }
  }
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    Vec v = per_rep[h];
    std::sort(v.begin(), v.end());
    rep.sup_dev.push_back(v.back());
    const std::size_t k = v.size();
    rep.median_dev.push_back(k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]));
    const double d = delta.empty()
                         ? std::pow(static_cast<double>(std::max<std::uint64_t>(horizons[h], 1)), -1.0 / 3.0)
                         : delta[h];
    rep.delta.push_back(d);
    rep.pass_fluid.push_back(rep.sup_dev.back() <= d);
  }
  return rep;
}

}  // namespace swnet
