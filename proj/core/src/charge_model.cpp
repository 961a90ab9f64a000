#include "polymer/charge_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace polymer {

namespace {

constexpr double kMeanVarTol = 1e-9;
constexpr double kProbSumTol = 1e-12;
constexpr double kSpanTol = 1e-12;
// probabilities this far below the peak cannot influence any double-precision
// expectation computed from the law
constexpr double kTrimRel = 1e-280;

double real_gcd(double a, double b, double noise_floor) {
  // Euclid with rounding to nearest; remainders below the noise floor are
  // rounding debris from near-exact multiples, not genuine structure
  while (b > noise_floor) {
    const double r = std::abs(a - b * std::round(a / b));
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

ChargeModel ChargeModel::gaussian() {
  ChargeModel m;
  m.kind_ = ChargeKind::Gaussian;
  m.ell_max_ = 100000;
  return m;
}

ChargeModel ChargeModel::lattice(std::vector<double> values, std::vector<double> probs,
                                 bool standardize) {
  if (values.empty() || values.size() != probs.size())
    throw ConfigError("lattice model: values and probs must be non-empty and equal length");

  // sort support, keep probabilities aligned
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> v(values.size()), p(values.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    v[k] = values[order[k]];
    p[k] = probs[order[k]];
  }
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    if (!(v[k] < v[k + 1]))
      throw ConfigError("lattice model: support values must be distinct");

  double psum = 0.0;
  for (double x : p) {
    if (!(x > 0.0) || x > 1.0)
      throw ConfigError("lattice model: probabilities must lie in (0,1]");
    psum += x;
  }
  if (std::abs(psum - 1.0) > kProbSumTol)
    throw ConfigError("lattice model: probabilities must sum to 1 within 1e-12");

  double mean = 0.0, second = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    mean += p[k] * v[k];
    second += p[k] * v[k] * v[k];
  }
  double var = second - mean * mean;

  if (standardize) {
    if (!(var > 0.0)) throw ConfigError("lattice model: law is degenerate, cannot standardize");
    const double sd = std::sqrt(var);
    for (double& x : v) x = (x - mean) / sd;
    mean = 0.0;
    second = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      mean += p[k] * v[k];
      second += p[k] * v[k] * v[k];
    }
    var = second - mean * mean;
  }
  if (std::abs(mean) > kMeanVarTol)
    throw ConfigError("lattice model: charge mean must be 0 within 1e-9 (set standardize)");
  if (std::abs(var - 1.0) > kMeanVarTol)
    throw ConfigError("lattice model: charge variance must be 1 within 1e-9 (set standardize)");

  // maximal span T with all values in T*Z
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  const double noise_floor = 1e-8 * std::max(1.0, vmax);
  double g = 0.0;
  for (double x : v)
    if (std::abs(x) > noise_floor) g = g == 0.0 ? std::abs(x) : real_gcd(g, std::abs(x), noise_floor);
  if (!(g > noise_floor))
    throw ConfigError("lattice model: support values admit no common span T > 0");
  // least-squares snap of the span against the integer marks, then validate
  std::vector<std::int64_t> marks(v.size());
  double smv = 0.0, smm = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    marks[k] = std::llround(v[k] / g);
    smv += static_cast<double>(marks[k]) * v[k];
    smm += static_cast<double>(marks[k]) * static_cast<double>(marks[k]);
  }
  g = smv / smm;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (std::abs(v[k] - static_cast<double>(marks[k]) * g) > kSpanTol * std::max(1.0, std::abs(v[k])))
      throw ConfigError("lattice model: support value is not an integer multiple of the span within 1e-12");
  }

  ChargeModel m;
  m.kind_ = ChargeKind::Lattice;
  m.span_ = g;
  m.values_ = std::move(v);
  m.probs_ = std::move(p);
  m.marks_ = std::move(marks);
  const auto s = static_cast<std::int64_t>(m.values_.size());
  m.ell_max_ = s <= 5 ? 20000 : std::max<std::int64_t>(1000, 100000 / s);
  m.cache_ = std::make_shared<Cache>();
  return m;
}

ChargeModel ChargeModel::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model descriptor is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ConfigError("model descriptor: required string field \"kind\" missing");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "gaussian") return gaussian();
  if (kind == "lattice") {
    if (!j.contains("values") || !j.contains("probs"))
      throw ConfigError("lattice model descriptor: fields \"values\" and \"probs\" required");
    std::vector<double> values, probs;
    try {
      values = j["values"].get<std::vector<double>>();
      probs = j["probs"].get<std::vector<double>>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("lattice model descriptor: \"values\" and \"probs\" must be numeric arrays");
    }
    const bool standardize = j.value("standardize", false);
    return lattice(std::move(values), std::move(probs), standardize);
  }
  throw ConfigError("model descriptor: \"kind\" must be \"gaussian\" or \"lattice\"");
}

ChargeModel ChargeModel::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

double ChargeModel::lattice_span() const {
  if (!is_lattice()) throw ConfigError("lattice_span: model is not a lattice law");
  return span_;
}

const std::vector<double>& ChargeModel::lattice_values() const {
  if (!is_lattice()) throw ConfigError("lattice_values: model is not a lattice law");
  return values_;
}

const std::vector<double>& ChargeModel::lattice_probs() const {
  if (!is_lattice()) throw ConfigError("lattice_probs: model is not a lattice law");
  return probs_;
}

double ChargeModel::ess_sup() const {
  if (!is_lattice()) return std::numeric_limits<double>::infinity();
  return values_.back();
}

void ChargeModel::check_ell(std::int64_t ell) const {
  if (ell < 0) throw ConfigError("block length ell must be nonnegative");
  if (is_lattice() && ell > ell_max_)
    throw NumericError("block length " + std::to_string(ell) + " exceeds the lattice ell_max " +
                       std::to_string(ell_max_));
}

namespace {

void trim_law(std::int64_t& offset, std::vector<double>& p) {
  double pmax = 0.0;
  for (double x : p) pmax = std::max(pmax, x);
  const double floor = pmax * kTrimRel;
  std::size_t lo = 0, hi = p.size();
  while (lo < hi && p[lo] < floor) ++lo;
  while (hi > lo + 1 && p[hi - 1] < floor) --hi;
  if (lo > 0 || hi < p.size()) {
    p = std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(lo),
                            p.begin() + static_cast<std::ptrdiff_t>(hi));
    offset += static_cast<std::int64_t>(lo);
  }
}

}  // namespace

ChargeModel::Law ChargeModel::law_of(std::int64_t ell) const {
  check_ell(ell);
  if (!is_lattice()) throw ConfigError("law_of: model is not a lattice law");
  if (ell == 0) return Law{0, {1.0}};

  Law base;
  base.offset = marks_.front();
  base.probs.assign(static_cast<std::size_t>(marks_.back() - marks_.front()) + 1, 0.0);
  for (std::size_t k = 0; k < marks_.size(); ++k)
    base.probs[static_cast<std::size_t>(marks_[k] - marks_.front())] = probs_[k];

  auto conv = [](const Law& a, const Law& b) {
    Law out;
    out.offset = a.offset + b.offset;
    out.probs.assign(a.probs.size() + b.probs.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.probs.size(); ++i) {
      const double ai = a.probs[i];
      if (ai == 0.0) continue;
      for (std::size_t j = 0; j < b.probs.size(); ++j) out.probs[i + j] += ai * b.probs[j];
    }
    trim_law(out.offset, out.probs);
    return out;
  };

  // cached powers of two, then one convolution per set bit of ell
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto& pow2 = cache_->pow2;
  if (pow2.empty()) pow2.emplace(1, base);
  std::int64_t top = 1;
  while (top * 2 <= ell) top *= 2;
  for (std::int64_t k = 2; k <= top; k *= 2)
    if (!pow2.count(k)) pow2.emplace(k, conv(pow2.at(k / 2), pow2.at(k / 2)));

  Law acc = pow2.at(top);
  for (std::int64_t bit = top / 2; bit >= 1; bit /= 2)
    if (ell & bit) acc = conv(acc, pow2.at(bit));
  return acc;
}

double ChargeModel::gstar(std::int64_t ell, double delta, double beta) const {
  check_ell(ell);
  if (!std::isfinite(delta) || !std::isfinite(beta))
    throw ConfigError("gstar: delta and beta must be finite");
  if (ell == 0) return 0.0;

  if (!is_lattice()) {
    const double l = static_cast<double>(ell);
    const double d = 1.0 + 2.0 * beta * l;
    const double g = -0.5 * std::log(d) + 0.5 * delta * delta * l / d;
    if (!std::isfinite(g)) throw OverflowError("gstar overflow (gaussian)");
    return g;
  }

  const Law law = law_of(ell);
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(law.probs.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < law.probs.size(); ++k) {
    const double p = law.probs[k];
    if (p <= 0.0) continue;
    const double x = static_cast<double>(law.offset + static_cast<std::int64_t>(k)) * span_;
    terms[k] = std::log(p) + delta * x - beta * x * x;
    m = std::max(m, terms[k]);
  }
  double s = 0.0;
  for (double t : terms)
    if (std::isfinite(t)) s += std::exp(t - m);
  const double g = m + std::log(s);
  if (!std::isfinite(g)) throw OverflowError("gstar overflow (lattice)");
  return g;
}

std::pair<double, double> ChargeModel::gstar_grad(std::int64_t ell, double delta,
                                                  double beta) const {
  check_ell(ell);
  if (ell == 0) return {0.0, 0.0};

  if (!is_lattice()) {
    const double l = static_cast<double>(ell);
    const double d = 1.0 + 2.0 * beta * l;
    return {delta * l / d, -l / d - delta * delta * l * l / (d * d)};
  }

  const Law law = law_of(ell);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < law.probs.size(); ++k) {
    const double p = law.probs[k];
    if (p <= 0.0) continue;
    const double x = static_cast<double>(law.offset + static_cast<std::int64_t>(k)) * span_;
    m = std::max(m, std::log(p) + delta * x - beta * x * x);
  }
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < law.probs.size(); ++k) {
    const double p = law.probs[k];
    if (p <= 0.0) continue;
    const double x = static_cast<double>(law.offset + static_cast<std::int64_t>(k)) * span_;
    const double w = std::exp(std::log(p) + delta * x - beta * x * x - m);
    s0 += w;
    s1 += w * x;
    s2 += w * x * x;
  }
  return {s1 / s0, -s2 / s0};
}

TiltStats ChargeModel::tilt_stats(double delta) const {
  if (!std::isfinite(delta)) throw ConfigError("tilt_stats: delta must be finite");
  if (!is_lattice()) return {-0.5 * delta * delta, delta, 1.0};

  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values_.size(); ++k)
    m = std::max(m, std::log(probs_[k]) + delta * values_[k]);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    const double w = std::exp(std::log(probs_[k]) + delta * values_[k] - m);
    s0 += w;
    s1 += w * values_[k];
    s2 += w * values_[k] * values_[k];
  }
  const double log_m = m + std::log(s0);
  const double mean = s1 / s0;
  if (!std::isfinite(log_m)) throw NumericError("tilt_stats overflow");
  return {-log_m, mean, s2 / s0 - mean * mean};
}

OmegaLaw ChargeModel::omega_law(std::int64_t ell) const {
  const Law law = law_of(ell);
  OmegaLaw out;
  out.ell = ell;
  for (std::size_t k = 0; k < law.probs.size(); ++k) {
    if (law.probs[k] <= 0.0) continue;
    out.support.push_back(static_cast<double>(law.offset + static_cast<std::int64_t>(k)) * span_);
    out.probs.push_back(law.probs[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------

GstarTable::GstarTable(const ChargeModel& model, double delta, double beta)
    : model_(&model), delta_(delta), beta_(beta) {
  if (!std::isfinite(delta) || !std::isfinite(beta))
    throw ConfigError("GstarTable: delta and beta must be finite");
  g_.assign(1, 0.0);
  dd_.assign(1, 0.0);
  db_.assign(1, 0.0);
  if (model.is_lattice()) {
    probs_ = {1.0};
    offset_ = 0;
  }
}

void GstarTable::extend(std::int64_t n) {
  if (n < static_cast<std::int64_t>(g_.size())) return;
  if (!model_->is_lattice()) {
    for (std::int64_t ell = static_cast<std::int64_t>(g_.size()); ell <= n; ++ell) {
      const double l = static_cast<double>(ell);
      const double d = 1.0 + 2.0 * beta_ * l;
      g_.push_back(-0.5 * std::log(d) + 0.5 * delta_ * delta_ * l / d);
      dd_.push_back(delta_ * l / d);
      db_.push_back(-l / d - delta_ * delta_ * l * l / (d * d));
    }
    return;
  }

  if (n > model_->ell_max())
    throw NumericError("GstarTable: block length " + std::to_string(n) +
                       " exceeds the lattice ell_max " + std::to_string(model_->ell_max()));

  const auto& bv = model_->lattice_values();
  const auto& bp = model_->lattice_probs();
  const double span = model_->lattice_span();
  std::vector<std::int64_t> bmarks(bv.size());
  for (std::size_t k = 0; k < bv.size(); ++k) bmarks[k] = std::llround(bv[k] / span);

  while (cur_ell_ < n) {
    // one convolution step with the base law
    const std::int64_t new_offset = offset_ + bmarks.front();
    const std::size_t width = static_cast<std::size_t>(bmarks.back() - bmarks.front());
    std::vector<double> next(probs_.size() + width, 0.0);
    for (std::size_t k = 0; k < bmarks.size(); ++k) {
      const double w = bp[k];
      const std::size_t shift = static_cast<std::size_t>(bmarks[k] - bmarks.front());
      for (std::size_t i = 0; i < probs_.size(); ++i) next[i + shift] += w * probs_[i];
    }
    probs_ = std::move(next);
    offset_ = new_offset;
    // denormal-level trim
    double pmax = 0.0;
    for (double x : probs_) pmax = std::max(pmax, x);
    std::size_t lo = 0, hi = probs_.size();
    while (lo < hi && probs_[lo] < pmax * 1e-280) ++lo;
    while (hi > lo + 1 && probs_[hi - 1] < pmax * 1e-280) --hi;
    if (lo > 0 || hi < probs_.size()) {
      probs_ = std::vector<double>(probs_.begin() + static_cast<std::ptrdiff_t>(lo),
                                   probs_.begin() + static_cast<std::ptrdiff_t>(hi));
      offset_ += static_cast<std::int64_t>(lo);
    }
    ++cur_ell_;
    eval_current(cur_ell_);
  }
}

void GstarTable::eval_current(std::int64_t ell) {
  const double span = model_->lattice_span();
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    const double p = probs_[k];
    if (p <= 0.0) continue;
    const double x = static_cast<double>(offset_ + static_cast<std::int64_t>(k)) * span;
    m = std::max(m, std::log(p) + delta_ * x - beta_ * x * x);
  }
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    const double p = probs_[k];
    if (p <= 0.0) continue;
    const double x = static_cast<double>(offset_ + static_cast<std::int64_t>(k)) * span;
    const double w = std::exp(std::log(p) + delta_ * x - beta_ * x * x - m);
    s0 += w;
    s1 += w * x;
    s2 += w * x * x;
  }
  const double g = m + std::log(s0);
  if (!std::isfinite(g)) throw OverflowError("gstar overflow (lattice table, ell=" + std::to_string(ell) + ")");
  g_.push_back(g);
  dd_.push_back(s1 / s0);
  db_.push_back(-s2 / s0);
}

double GstarTable::at(std::int64_t ell) {
  extend(ell);
  return g_[static_cast<std::size_t>(ell)];
}

void GstarTable::grad_at(std::int64_t ell, double& g, double& d_delta, double& d_beta) {
  extend(ell);
  g = g_[static_cast<std::size_t>(ell)];
  d_delta = dd_[static_cast<std::size_t>(ell)];
  d_beta = db_[static_cast<std::size_t>(ell)];
}

}  // namespace polymer
