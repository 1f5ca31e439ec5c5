"""Reading another agent's record: Born rule vs a deterministic link.

Alice premeasures a qubit prepared in c0|0> + c1|1> into her record. Bob
then reads the record back. Two incompatible accounts of that readout:

* Treat the readout as an ordinary quantum measurement of the record
  (relative-facts rules): Bob's outcome is Born distributed over the
  pointer values, independent of Alice's relative fact. Conditioning on
  her fact changes nothing, so P(mismatch) = 0.42 here.
* Add cross-perspective links (cpl rules): the readout is pinned to
  Alice's fact, deterministically. The engine records the Born weight
  each pin overrides; a pin whose weight is essentially zero is the
  quantitative contradiction.

The record's reduced density matrix is untouched by wiring a further
register onto it, which is why the two accounts cannot be told apart
before the readout happens.
"""

import wfcheck

scenario = wfcheck.parse(wfcheck.bundled_scenario_text("cpl"))

print("unconditioned readout distribution (relative facts):")
dist = wfcheck.predicted_distribution(scenario, wfcheck.RuleSet.rqm5(), "bob", "rb")
for value in sorted(dist):
    print(f"  rb={value}  p = {dist[value]:.4f}")

print("\nconditioned on alice's fact = 0 (relative facts): unchanged")
conditioned = wfcheck.predicted_distribution(
    scenario, wfcheck.RuleSet.rqm5(), "bob", "rb", {"alice.A": 0})
for value in sorted(conditioned):
    print(f"  rb={value}  p = {conditioned[value]:.4f}  (gap {abs(conditioned[value] - dist[value]):.2e})")

print("\nconditioned on alice's fact = 0 (cross-perspective links): pinned")
pinned = wfcheck.predicted_distribution(
    scenario, wfcheck.RuleSet.rqm5_cpl(), "bob", "rb", {"alice.A": 0})
for value in sorted(pinned):
    print(f"  rb={value}  p = {pinned[value]:.4f}")

print("\nsampled histories under cpl rules (the pin in action):")
for seed in range(4):
    result = wfcheck.run(scenario, wfcheck.RuleSet.rqm5_cpl(), seed=seed)
    fact = result.ledger.value_for("alice.A")
    pin = result.pins[0]
    print(f"  seed {seed}: alice's fact {fact}, bob read {result.results['rb']}, "
          f"pin overrode Born weight {pin.born_weight:.4f}")

report = wfcheck.cpl_probability_check([0.3 ** 0.5, 0.7 ** 0.5], 1)
print(f"\nanalysis verdict: {report.verdict}")
print(f"  {report.narrative}")
