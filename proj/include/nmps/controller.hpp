#pragma once

#include <optional>
#include <vector>

#include "nmps/rng.hpp"

namespace nmps {

// Running statistics of the Homeostasis trigger. The update keeps the exact
// published order: mean first, then variance against the updated mean, then
// the standardized-exponential moving average.
struct HomeoState {
  double rho = 0.01;             // target trigger rate, in (0, 1]
  double mean = 0.0;             // x bar
  double second_moment = 1.0;    // x^2 bar
  double transformed_mean = 1.0; // x^+ bar
  long t = 0;
};

HomeoState make_homeo(double rho);

struct HomeoStep {
  bool trigger = false;
  double probability = 0.0;  // min(1, rho * x^+ / x^+bar) used for the draw
  HomeoState state;
};

// One signal observation; trigger ~ Bernoulli(probability). The long-run
// trigger rate tracks rho for stationary signals.
HomeoStep homeo_step(const HomeoState& h, double x_t, Rng& rng);

enum class Mode { Exploit, Explor };

struct SwitchState {
  Mode mode = Mode::Exploit;
  int explore_steps_remaining = 0;
  int explore_duration = 100;
  long starting_mode_steps = 0;
};

struct ModeDecision {
  Mode mode = Mode::Exploit;
  bool window_started = false;  // an explore window began this step
  SwitchState sw;
  HomeoState homeo;
};

// Mode selection: the starting-mode window forces exploration; an open
// explore window runs to completion uninterrupted; otherwise the promise
// signal feeds Homeostasis and a trigger opens a fresh window of exactly
// explore_duration steps. A missing promise signal outside the starting
// window selects exploit.
ModeDecision select_mode(const SwitchState& sw, const HomeoState& h,
                         std::optional<double> promise, long step, Rng& rng);

// Fraction of steps on which a new explore window began, read off a logged
// mode sequence (exploit-to-explor edges; an initial explor run counts once).
double switch_rate(const std::vector<Mode>& modes);

}  // namespace nmps
