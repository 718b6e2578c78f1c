#include "aoisched/link.hpp"

#include <limits>

namespace aoisched {

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Wet: return "WET";
    case Scheme::Oma: return "OMA";
    case Scheme::Noma: return "NOMA";
    case Scheme::WetOma: return "WET+OMA";
  }
  return "?";
}

Scheme SlotPlan::scheme() const {
  const bool t1 = transmits(0);
  const bool t2 = transmits(1);
  if (t1 && t2) {
    if (wet) throw ModelError("charging is not possible while both devices transmit");
    return Scheme::Noma;
  }
  if (t1 || t2) return wet ? Scheme::WetOma : Scheme::Oma;
  return Scheme::Wet;
}

LinkModel::LinkModel(const SystemParams& params) : LinkModel(params, derive(params)) {}

LinkModel::LinkModel(const SystemParams& params, const DerivedParams& derived)
    : params_(params), derived_(derived) {}

double LinkModel::outage_oma(int device, double power) const {
  if (power <= 0.0) return 1.0;
  const double lambda = params_.lambda.at(static_cast<std::size_t>(device));
  return -std::expm1(-lambda * derived_.beta * derived_.sigma2 / power);
}

int LinkModel::first_decoded(double p1, double p2) const {
  return p1 / params_.lambda[0] >= p2 / params_.lambda[1] ? 0 : 1;
}

OutagePair LinkModel::outage_noma(double p1, double p2) const {
  OutagePair out;
  if (p1 <= 0.0 || p2 <= 0.0) {
    out.p_out[0] = outage_oma(0, p1);
    out.p_out[1] = outage_oma(1, p2);
    return out;
  }
  const std::array<double, kDevices> power{p1, p2};
  const int a = first_decoded(p1, p2);
  const int b = 1 - a;
  const auto ia = static_cast<std::size_t>(a);
  const auto ib = static_cast<std::size_t>(b);
  const double la = params_.lambda[ia];
  const double lb = params_.lambda[ib];
  const double pa = power[ia];
  const double pb = power[ib];
  const double beta = derived_.beta;
  const double s2 = derived_.sigma2;

  const double ratio = lb * pa / (lb * pa + la * pb * beta);
  out.p_out[ia] = 1.0 - ratio * std::exp(-la * beta * s2 / pa);
  out.p_out[ib] = 1.0 - ratio * std::exp(-(lb * pa + la * pb + la * pb * beta) * beta * s2 / (pa * pb));
  return out;
}

double LinkModel::outage_wet_oma(int device, double power) const {
  if (power <= 0.0) return 1.0;
  const double lambda = params_.lambda.at(static_cast<std::size_t>(device));
  const double signal = params_.lambda0 * power;
  const double denom = signal + lambda * derived_.beta * params_.p_hap_watts;
  const double ratio = denom > 0.0 ? signal / denom : 1.0;
  return 1.0 - ratio * std::exp(-lambda * derived_.beta * derived_.sigma2 / power);
}

double LinkModel::mean_harvest(int device) const {
  return params_.eta * params_.tau_s * params_.p_hap_watts / params_.lambda.at(static_cast<std::size_t>(device));
}

OutagePair LinkModel::outage(const SlotPlan& plan) const {
  OutagePair out;
  switch (plan.scheme()) {
    case Scheme::Wet:
      break;
    case Scheme::Oma:
    case Scheme::WetOma: {
      const int n = plan.transmits(0) ? 0 : 1;
      const double p = plan.power[static_cast<std::size_t>(n)];
      out.p_out[static_cast<std::size_t>(n)] = plan.wet ? outage_wet_oma(n, p) : outage_oma(n, p);
      break;
    }
    case Scheme::Noma:
      out = outage_noma(plan.power[0], plan.power[1]);
      break;
  }
  return out;
}

bool LinkModel::decodable(double sinr) const { return std::log2(1.0 + sinr) >= params_.r_bar; }

SlotOutcome LinkModel::sample_slot_outcome(const SlotPlan& plan, RngStream& rng, HarvestMode harvest,
                                           DecodingOrder order) const {
  // Channel reciprocity: the same gain serves uplink decoding and downlink harvest.
  const std::array<double, kDevices> gain{rng.exponential(params_.lambda[0]), rng.exponential(params_.lambda[1])};
  const double u0 = rng.uniform();
  const double self_gain =
      params_.lambda0 > 0.0 ? -std::log1p(-u0) / params_.lambda0 : std::numeric_limits<double>::infinity();

  SlotOutcome outcome;
  const double interference = plan.wet ? params_.p_hap_watts * self_gain : 0.0;
  const double noise = interference + derived_.sigma2;
  const std::array<double, kDevices> received{plan.power[0] * gain[0], plan.power[1] * gain[1]};

  const bool t1 = plan.transmits(0);
  const bool t2 = plan.transmits(1);
  if (t1 && t2) {
    const int a = order == DecodingOrder::MeanPower ? first_decoded(plan.power[0], plan.power[1])
                                                    : (received[0] >= received[1] ? 0 : 1);
    const auto ia = static_cast<std::size_t>(a);
    const auto ib = static_cast<std::size_t>(1 - a);
    const bool first_ok = decodable(received[ia] / (received[ib] + noise));
    outcome.success[ia] = first_ok;
    outcome.success[ib] = first_ok && decodable(received[ib] / noise);
  } else if (t1 || t2) {
    const auto n = static_cast<std::size_t>(t1 ? 0 : 1);
    outcome.success[n] = decodable(received[n] / noise);
  }

  if (plan.wet) {
    for (int n = 0; n < kDevices; ++n) {
      if (plan.transmits(n)) continue;
      const auto i = static_cast<std::size_t>(n);
      outcome.harvested[i] = harvest == HarvestMode::Deterministic
                                 ? mean_harvest(n)
                                 : params_.eta * params_.tau_s * params_.p_hap_watts * gain[i];
    }
  }
  return outcome;
}

McEstimate LinkModel::mc_outage_estimate(const SlotPlan& plan, std::uint64_t n_samples, std::uint64_t seed,
                                         DecodingOrder order) const {
  if (n_samples == 0) throw ModelError("mc_outage_estimate needs at least one sample");
  RngStream rng(seed);
  std::array<std::uint64_t, kDevices> failures{0, 0};
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const auto outcome = sample_slot_outcome(plan, rng, HarvestMode::Deterministic, order);
    for (std::size_t n = 0; n < kDevices; ++n) failures[n] += outcome.success[n] ? 0 : 1;
  }
  McEstimate est;
  est.samples = n_samples;
  const double count = static_cast<double>(n_samples);
  for (std::size_t n = 0; n < kDevices; ++n) {
    const double p = static_cast<double>(failures[n]) / count;
    est.outage[n] = p;
    est.std_error[n] = std::sqrt(p * (1.0 - p) / count);
  }
  return est;
}

}  // namespace aoisched

namespace aoisched {

std::vector<OutageCheck> outage_audit(const LinkModel& link, std::uint64_t n_samples, std::uint64_t seed) {
  const auto& params = link.params();
  const double full = params.p_s_max_watts;
  std::vector<OutageCheck> rows;
  std::uint64_t k = 0;

  auto finish = [](OutageCheck& row) { row.pass = std::abs(row.analytic - row.mc) <= 4.0 * row.std_error; };

  for (const bool wet : {false, true}) {
    for (int n = 0; n < kDevices; ++n) {
      SlotPlan plan{wet, {0.0, 0.0}};
      plan.power[static_cast<std::size_t>(n)] = full;
      const auto est = link.mc_outage_estimate(plan, n_samples, seed + k++);
      OutageCheck row;
      row.scheme = std::string(scheme_name(plan.scheme()));
      row.device = n;
      row.alpha1 = n == 0 ? 1.0 : 0.0;
      row.analytic = link.outage(plan).p_out[static_cast<std::size_t>(n)];
      row.mc = est.outage[static_cast<std::size_t>(n)];
      row.std_error = est.std_error[static_cast<std::size_t>(n)];
      finish(row);
      rows.push_back(row);
    }
  }

  const int levels = params.power_levels;
  for (int l = 1; l < levels; ++l) {
    const double alpha1 = static_cast<double>(l) / levels;
    const double step = link.derived().p_step;
    const SlotPlan plan{false, {l * step, (levels - l) * step}};
    const std::uint64_t row_seed = seed + k++;
    const auto fixed = link.mc_outage_estimate(plan, n_samples, row_seed, DecodingOrder::MeanPower);
    const auto dynamic = link.mc_outage_estimate(plan, n_samples, row_seed, DecodingOrder::Instantaneous);
    const auto analytic = link.outage(plan);
    for (std::size_t n = 0; n < kDevices; ++n) {
      OutageCheck row;
      row.scheme = "NOMA";
      row.device = static_cast<int>(n);
      row.alpha1 = alpha1;
      row.analytic = analytic.p_out[n];
      row.mc = fixed.outage[n];
      row.std_error = fixed.std_error[n];
      row.mc_instantaneous = dynamic.outage[n];
      finish(row);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace aoisched
