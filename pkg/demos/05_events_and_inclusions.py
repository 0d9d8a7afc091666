"""Slope events, their frequencies, and the deterministic event inclusions.

Run:  python3 demos/05_events_and_inclusions.py   (about half a minute)
"""

from lcslab import (
    ExperimentConfig,
    check_inclusions,
    estimate_event,
    increment_probability_check,
    run_drop_experiment,
)

cfg = ExperimentConfig(n=400, p=0.5, reps=300, seed=5, epsilon=0.001, D=16)
print(f"n={cfg.n}, reps={cfg.reps}, epsilon={cfg.epsilon}, "
      f"delta={cfg.delta_value:.4f}, D={cfg.D}, gamma={cfg.gamma_value:.2e}")

summary = run_drop_experiment(cfg)
print("\nevent frequencies with exact binomial CIs:")
for name in ("E1", "E2", "E3", "E4", "E5", "E6", "Eslope"):
    print(" ", estimate_event(cfg, name, summary=summary))

report = check_inclusions(cfg, summary=summary)
print("\ndeterministic inclusions (violations must be zero):")
print(f"  E3 & E4k -> E6k : {report.violations_346} violations, "
      f"LHS held {report.lhs_held_346} of {report.checked_346}")
print(f"  E4 & E5 & E6k -> E2k : {report.violations_123} violations, "
      f"LHS held {report.lhs_held_123} of {report.checked_123}")

print("\nexact conditional increment probabilities vs the matching bound:")
rows = increment_probability_check(120, 5, seed=6)
for r in rows:
    print(f"  state {r.state_id}: P(increase) = {r.exact_prob:.3f} "
          f">= 0.5 * {r.nonempty}/{r.k} = {r.bound_k:.3f}  ok={r.ok}")
