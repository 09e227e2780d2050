"""Gadget instances built from a relation.

A consistent instance is sensitive when every partial solution on a
constraint scope extends. The gadget built from a relation that is not
determined by its projections is consistent but not sensitive.
"""
from sensitive_csp import corpus
from sensitive_csp.algebra import generate_subpower, star_closure
from sensitive_csp.consistency import is_kl_instance
from sensitive_csp.constructions import build_prop_sens
from sensitive_csp.solver import has_extension_property, is_sensitive

alg = corpus.load("min-horn")
rel = generate_subpower(alg, [(0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0), (1, 1, 1, 1)])
print("relation:", sorted(rel.tuples))
print("equal to its 3-star closure:", star_closure(rel, 3).tuples == rel.tuples)

gadget = build_prop_sens(rel, 2)
print("gadget variables:", gadget.variables)
print("(2,3)-consistent:", is_kl_instance(gadget, 2, 3).holds)
check = is_sensitive(gadget)
print("sensitive:", check.holds, "witness:", check.witness)

# %% With a majority operation the bundled gadget behaves.
maj_gadget = corpus.load("gadget-sens-maj")
print("majority gadget sensitive:", is_sensitive(maj_gadget).holds)

# %% Sensitivity is weaker than the extension property.
sw = corpus.load("gadget-sw-threshold")
print("threshold gadget sensitive:", is_sensitive(sw).holds,
      "extension:", has_extension_property(sw).holds)
