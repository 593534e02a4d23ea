#include "nmps/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nmps {

namespace {
// Guards the zero-variance division at t=1, forcing x^+ = exp(0) there.
constexpr double kVarianceEps = 1e-8;
// The standardized deviation is bounded by sqrt(tau) <= sqrt(100/rho), so a
// constant-then-jump signal at small rho can push exp() to infinity and poison
// the transformed mean for good. The clamp keeps statistics finite for any
// bounded signal and is inactive in ordinary regimes.
constexpr double kMaxStandardized = 50.0;
}

HomeoState make_homeo(double rho) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("make_homeo: rho must be in (0, 1]");
  HomeoState h;
  h.rho = rho;
  return h;
}

HomeoStep homeo_step(const HomeoState& h, double x_t, Rng& rng) {
  if (!std::isfinite(x_t))
    throw std::invalid_argument("homeo_step: signal must be finite");
  HomeoStep out;
  out.state = h;
  HomeoState& s = out.state;
  s.t = h.t + 1;
  const double tau = std::min(static_cast<double>(s.t), 100.0 / s.rho);
  const double a = 1.0 / tau;
  s.mean = (1.0 - a) * s.mean + a * x_t;
  const double dev = x_t - s.mean;  // deviation from the already-updated mean
  s.second_moment = (1.0 - a) * s.second_moment + a * dev * dev;
  const double standardized = std::clamp(dev / std::sqrt(s.second_moment + kVarianceEps),
                                         -kMaxStandardized, kMaxStandardized);
  const double x_plus = std::exp(standardized);
  s.transformed_mean = (1.0 - a) * s.transformed_mean + a * x_plus;
  out.probability = std::min(1.0, s.rho * x_plus / s.transformed_mean);
  out.trigger = rng.bernoulli(out.probability);
  return out;
}

ModeDecision select_mode(const SwitchState& sw, const HomeoState& h,
                         std::optional<double> promise, long step, Rng& rng) {
  ModeDecision out;
  out.sw = sw;
  out.homeo = h;

  if (step < sw.starting_mode_steps) {
    out.mode = Mode::Explor;
    return out;
  }
  if (sw.explore_steps_remaining > 0) {
    out.sw.explore_steps_remaining -= 1;
    out.mode = Mode::Explor;
    out.sw.mode = Mode::Explor;
    return out;
  }
  if (!promise.has_value()) {
    out.mode = Mode::Exploit;  // promise window not yet full
    out.sw.mode = Mode::Exploit;
    return out;
  }
  const HomeoStep hs = homeo_step(h, *promise, rng);
  out.homeo = hs.state;
  if (hs.trigger) {
    out.window_started = true;
    out.sw.explore_steps_remaining = sw.explore_duration - 1;
    out.mode = Mode::Explor;
    out.sw.mode = Mode::Explor;
  } else {
    out.mode = Mode::Exploit;
    out.sw.mode = Mode::Exploit;
  }
  return out;
}

double switch_rate(const std::vector<Mode>& modes) {
  if (modes.empty())
    throw std::invalid_argument("switch_rate: history must be nonempty");
  long starts = 0;
  for (size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] == Mode::Explor && (i == 0 || modes[i - 1] == Mode::Exploit))
      ++starts;
  }
  return static_cast<double>(starts) / static_cast<double>(modes.size());
}

}  // namespace nmps
