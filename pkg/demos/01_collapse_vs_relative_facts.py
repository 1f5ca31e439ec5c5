"""A correlated pair under three rule sets.

Two qubits are prepared in c0|00> + c1|11> with c^2 = (0.3, 0.7). Alice
premeasures one side into her record; Bob measures the other side
directly. How often do the two outcomes agree?

* Under orthodox collapse, Alice's interaction already collapses the
  pair, so Bob always matches: P = 1.
* Under relative facts, Alice's outcome is a fact for Alice only. If she
  and Bob condition on nothing shared, the two outcomes are independent:
  P = sum of c^4 = 0.58.
* Put Alice and Bob in one conditioning pool (one composite "observer")
  and agreement returns: P = 1.

The dependence on where the observer/observed split is drawn is the
partition ambiguity the pair analysis reports as its verdict.
"""

import wfcheck

PAIR = """scenario pair
system S1 2
system S2 2
agent alice record A 2 init 0
agent bob record B 2 init 0
prepare schmidt(0.5477225575051661, 0.8366600265340756) on S1, S2
interact alice on S1 basis basis1 record A
interact bob on S2 basis basis1 record B
"""

SHARED = PAIR.replace("prepare", "partition shared group alice, bob\nprepare")


def match_probability(joint):
    return sum(p for (ra, rb), p in joint.items() if ra == rb)


def show(title, scenario_text, rules):
    scenario = wfcheck.parse(scenario_text)
    joint = wfcheck.exact_joint(scenario, rules)
    print(f"{title}:")
    for outcome in sorted(joint):
        print(f"  alice={outcome[0]} bob={outcome[1]}  p = {joint[outcome]:.4f}")
    print(f"  P(match) = {match_probability(joint):.4f}\n")


show("orthodox collapse", PAIR, wfcheck.RuleSet.orthodox())
show("relative facts, separate pools", PAIR, wfcheck.RuleSet.rqm5())
show("relative facts, one shared pool", SHARED, wfcheck.RuleSet.rqm5())

report = wfcheck.epr_correlation_check([0.3 ** 0.5, 0.7 ** 0.5])
print(f"analysis verdict: {report.verdict}")
for claim, values, gap in [(f.claim, f.values, f.discrepancy) for f in report.findings]:
    print(f"  {claim}")
    for label, value in values:
        print(f"    {label}: {value:.4f}")
    print(f"    discrepancy: {gap:.4f}")
