"""Searching for near-unanimity terms.

A term is near-unanimity when it returns ``x`` whenever all but at most
one argument equal ``x``. The search runs a subpower closure and reads
the term off the derivation.
"""
from sensitive_csp import corpus
from sensitive_csp.algebra import find_nu_term, is_nu, term_to_json

for name, arity in [("maj", 3), ("threshold24", 3), ("threshold24", 4), ("min-horn", 4)]:
    alg = corpus.load(name)
    term = find_nu_term(alg, arity)
    if term is None:
        print(f"{name}, arity {arity}: none")
    else:
        print(f"{name}, arity {arity}: {term_to_json(term)}  verified={is_nu(alg, term, arity)}")
