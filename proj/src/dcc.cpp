#include <cmath>
#include <random>
#include <string>

#include "sentinel/dgp.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

void validate(const DccParams& p) {
  const std::size_t d = p.k_plus_1;
  if (d < 2) throw ConfigError("DCC dimension must be at least 2");
  if (static_cast<std::size_t>(p.omega_g.size()) != d || static_cast<std::size_t>(p.alpha_g.size()) != d ||
      static_cast<std::size_t>(p.beta_g.size()) != d)
    throw ConfigError("GARCH coefficient vectors must have k_plus_1 entries");
  if (static_cast<std::size_t>(p.q_bar.rows()) != d || static_cast<std::size_t>(p.q_bar.cols()) != d)
    throw ConfigError("q_bar must be k_plus_1 x k_plus_1");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(p.omega_g[i] > 0.0)) throw ConfigError("omega_g must be positive");
    if (!(p.alpha_g[i] >= 0.0) || !(p.beta_g[i] >= 0.0)) throw ConfigError("alpha_g and beta_g must be nonnegative");
    if (!(p.alpha_g[i] + p.beta_g[i] < 1.0)) throw ConfigError("alpha_g + beta_g must be below 1");
  }
  if (!(p.alpha_q >= 0.0) || !(p.beta_q >= 0.0)) throw ConfigError("alpha_q and beta_q must be nonnegative");
  if (!(p.alpha_q + p.beta_q < 1.0)) throw ConfigError("alpha_q + beta_q must be below 1");
  if (!(p.nu > 2.0)) throw ConfigError("nu must exceed 2");
  for (std::size_t i = 0; i < d; ++i) {
    if (p.q_bar(i, i) != 1.0) throw ConfigError("q_bar must have a unit diagonal");
    for (std::size_t j = 0; j < i; ++j)
      if (!(p.q_bar(i, j) == p.q_bar(j, i))) throw ConfigError("q_bar must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(p.q_bar);
  if (llt.info() != Eigen::Success) throw ConfigError("q_bar must be positive definite");
}

void validate(const BreakSpec& brk, const DccParams& p) {
  if (brk.t_star < 0) throw ConfigError("break time must be nonnegative");
  if (!(brk.beta_post >= 0.0)) throw ConfigError("beta_post must be nonnegative");
  for (Eigen::Index i = 0; i < p.alpha_g.size(); ++i)
    if (!(p.alpha_g[i] + brk.beta_post < 1.0)) throw ConfigError("beta_post breaks GARCH stationarity");
  if (!(p.alpha_q + brk.beta_post < 1.0)) throw ConfigError("beta_post breaks correlation stationarity");
}

DccParams baseline_params(std::size_t K) {
  DccParams p;
  const auto d = static_cast<Eigen::Index>(K + 1);
  p.k_plus_1 = K + 1;
  p.omega_g = Eigen::VectorXd::Constant(d, 0.1);
  p.alpha_g = Eigen::VectorXd::Constant(d, 0.1);
  p.beta_g = Eigen::VectorXd::Constant(d, 0.7);
  p.alpha_q = 0.1;
  p.beta_q = 0.7;
  p.nu = 5.0;
  p.q_bar = Eigen::MatrixXd::Constant(d, d, 0.5);
  p.q_bar.diagonal().setOnes();
  return p;
}

DccParams with_persistence(const DccParams& params, double beta) {
  DccParams p = params;
  p.beta_g.setConstant(beta);
  p.beta_q = beta;
  return p;
}

namespace {

Eigen::VectorXd vector_field(const nlohmann::json& j, const char* key, std::size_t d) {
  const auto& v = j.at(key);
  Eigen::VectorXd out(static_cast<Eigen::Index>(d));
  if (v.is_number()) {
    out.setConstant(v.get<double>());
  } else {
    if (!v.is_array() || v.size() != d) throw SchemaError(std::string(key) + " must have k_plus_1 entries");
    for (std::size_t i = 0; i < d; ++i) out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

}  // namespace

nlohmann::ordered_json to_json(const DccParams& p) {
  nlohmann::ordered_json j;
  j["k_plus_1"] = p.k_plus_1;
  auto vec = [](const Eigen::VectorXd& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  j["omega_g"] = vec(p.omega_g);
  j["alpha_g"] = vec(p.alpha_g);
  j["beta_g"] = vec(p.beta_g);
  j["alpha_q"] = p.alpha_q;
  j["beta_q"] = p.beta_q;
  if (std::isinf(p.nu)) j["nu"] = "inf";
  else j["nu"] = p.nu;
  nlohmann::ordered_json q = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < p.q_bar.rows(); ++r) q.push_back(vec(p.q_bar.row(r).transpose()));
  j["q_bar"] = q;
  return j;
}

DccParams dcc_params_from_json(const nlohmann::json& j) {
  try {
    DccParams p;
    p.k_plus_1 = j.at("k_plus_1").get<std::size_t>();
    const std::size_t d = p.k_plus_1;
    if (d < 2) throw SchemaError("k_plus_1 must be at least 2");
    p.omega_g = vector_field(j, "omega_g", d);
    p.alpha_g = vector_field(j, "alpha_g", d);
    p.beta_g = vector_field(j, "beta_g", d);
    p.alpha_q = j.at("alpha_q").get<double>();
    p.beta_q = j.at("beta_q").get<double>();
    const auto& nu = j.at("nu");
    if (nu.is_string()) {
      const auto s = nu.get<std::string>();
      if (s != "inf" && s != "Infinity") throw SchemaError("nu must be a number or \"inf\"");
      p.nu = kGaussianDof;
    } else {
      p.nu = nu.get<double>();
    }
    const auto& q = j.at("q_bar");
    const auto di = static_cast<Eigen::Index>(d);
    if (q.is_number()) {
      p.q_bar = Eigen::MatrixXd::Constant(di, di, q.get<double>());
      p.q_bar.diagonal().setOnes();
    } else {
      if (!q.is_array() || q.size() != d) throw SchemaError("q_bar must be k_plus_1 x k_plus_1");
      p.q_bar.resize(di, di);
      for (std::size_t r = 0; r < d; ++r) {
        if (!q[r].is_array() || q[r].size() != d) throw SchemaError("q_bar must be k_plus_1 x k_plus_1");
        for (std::size_t c = 0; c < d; ++c)
          p.q_bar(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = q[r][c].get<double>();
      }
    }
    return p;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("invalid DCC parameters: ") + e.what());
  }
}

std::optional<BreakSpec> break_from_json(const nlohmann::json& j) {
  if (!j.contains("break") || j.at("break").is_null()) return std::nullopt;
  try {
    const auto& b = j.at("break");
    BreakSpec out;
    out.t_star = b.at("t_star").get<std::int64_t>();
    out.beta_post = b.at("beta_post").get<double>();
    return out;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("invalid break specification: ") + e.what());
  }
}

DccState DccFilter::initial(const DccParams& p) {
  DccState s;
  s.d2 = p.omega_g.array() / (1.0 - p.alpha_g.array() - p.beta_g.array());
  s.q = p.q_bar;
  return s;
}

Eigen::MatrixXd DccFilter::correlation(const Eigen::MatrixXd& q) {
  const Eigen::VectorXd inv = q.diagonal().array().sqrt().inverse();
  Eigen::MatrixXd r = inv.asDiagonal() * q * inv.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

DccState DccFilter::update(const DccParams& p, const DccState& s, const Eigen::VectorXd& w) {
  DccState next;
  const Eigen::ArrayXd d = s.d2.array().sqrt();
  const Eigen::VectorXd eps = (w.array() / d).matrix();
  next.d2 = (p.omega_g.array() + p.alpha_g.array() * w.array().square() + p.beta_g.array() * s.d2.array()).matrix();
  next.q = (1.0 - p.alpha_q - p.beta_q) * p.q_bar + p.alpha_q * (eps * eps.transpose()) + p.beta_q * s.q;
  return next;
}

SimulatedPanel simulate_dcc(const DccParams& params, const std::optional<BreakSpec>& brk, std::size_t n,
                            std::size_t burnin, Engine& rng, bool keep_truth) {
  validate(params);
  if (brk) {
    validate(*brk, params);
    if (brk->t_star > static_cast<std::int64_t>(n)) throw ConfigError("break time exceeds the sample length");
  }
  const DccParams post = brk ? with_persistence(params, brk->beta_post) : params;
  const auto d = static_cast<Eigen::Index>(params.k_plus_1);
  const bool gaussian = std::isinf(params.nu);
  const double scale = gaussian ? 1.0 : std::sqrt((params.nu - 2.0) / params.nu);

  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(gaussian ? 1.0 : params.nu);

  SimulatedPanel out;
  out.returns.reserve(n);
  if (keep_truth) out.truth.reserve(n);

  DccState state = DccFilter::initial(params);
  Eigen::VectorXd z(d);
  Eigen::VectorXd w(d);
  const auto total = static_cast<std::int64_t>(burnin + n);
  const auto burn = static_cast<std::int64_t>(burnin);
  for (std::int64_t step = 0; step < total; ++step) {
    const std::int64_t t = step - burn + 1;  // retained days are t = 1..n
    if (t == 1) {
      out.presample.has_lag = burnin > 0;
      if (!out.presample.has_lag) out.presample.state = state;
    }
    const Eigen::MatrixXd r = DccFilter::correlation(state.q);
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) throw NumericError("conditional correlation lost positive definiteness");
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
    Eigen::VectorXd eps = llt.matrixL() * z;
    if (!gaussian) eps *= scale / std::sqrt(chi2(rng) / params.nu);
    const Eigen::VectorXd sd = state.d2.array().sqrt().matrix();
    w = (sd.array() * eps.array()).matrix();

    if (t >= 1) {
      ObservationRecord rec;
      rec.t = t;
      rec.x = w[0];
      rec.y.assign(w.data() + 1, w.data() + d);
      out.returns.push_back(std::move(rec));
      if (keep_truth) out.truth.push_back({sd, r});
    }
    if (t == 0) {
      out.presample.state = state;
      out.presample.w = w;
    }
    // The transition into day t + 1 uses post-break persistence when t + 1 > t_star.
    const bool broken = brk && t + 1 > brk->t_star;
    state = DccFilter::update(broken ? post : params, state, w);
  }
  return out;
}

}  // namespace sentinel
