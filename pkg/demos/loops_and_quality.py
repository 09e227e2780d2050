"""Loop statements for binary relations and quality of evaluations."""
from sensitive_csp import corpus
from sensitive_csp.absorption import verify_loop_theorems
from sensitive_csp.experiments import least_sufficient_quality, weak_instance
from sensitive_csp.patterns import Quality

# %% Every invariant binary relation of the majority algebra is checked.
report = verify_loop_theorems(corpus.load("maj"))
print("relations", report.relations, "violations", len(report.violations),
      "vacuous", report.vacuous)

# %% Quality of a two-variable evaluation, level by level.
inst = corpus.load("four-cycle-23")
q = Quality(inst, 2)
for evaluation in ({"a": 0, "b": 1}, {"a": 0, "c": 1}):
    print(evaluation, [q(evaluation, d) for d in (1, 2, 3)])

# %% On random weak instances a small depth already suffices.
alg = corpus.load("threshold24")
print("least sufficient depth:",
      [least_sufficient_quality(weak_instance(alg, 4, 2, s), 2) for s in range(5)])
