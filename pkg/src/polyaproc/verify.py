"""Invariant suite run by ``polyaproc verify``."""

from __future__ import annotations

import traceback
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import linalg
from .cones import a_alpha, a_alpha_by_sums, dominated_by
from .errors import PolyaError
from .moments import exact_moment, gamma_eval
from .operator import ReducedTable, monogenic_nu, nilpotence_index
from .process import ProcessSpec, validate_process
from .simulate import SimConfig, Estimand, estimate_moments, simulate_path, trial_generator
from .spectral import SpectralData, build_replacement_endomorphism, classify_power, classify_process
from .upoly import UPolynomial, indices_of_degree, order_key


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"invariant": self.name, "passed": self.passed, "detail": self.detail}


class _Suite:
    def __init__(self, spec: ProcessSpec, spectral: SpectralData, degree: int, seed: int, workers: int):
        self.spec = spec
        self.sd = spectral
        self.degree = degree
        self.seed = seed
        self.workers = workers
        self.table = ReducedTable(spec, spectral)
        self.exact = spectral.exact
        self.tol = spectral.tol * 1e3
        s = spectral.dimension
        self.alphas = [a for d in range(degree + 1) for a in indices_of_degree(s, d)]

    def close(self, a, b, scale=1.0) -> bool:
        if self.exact and isinstance(a, Fraction) and isinstance(b, Fraction):
            return a == b
        return abs(complex(a) - complex(b)) <= self.tol * max(1.0, abs(complex(b)), scale)

    def poly_zero(self, f: UPolynomial, scale=1.0) -> bool:
        return f.is_zero(0 if self.exact else self.tol * max(1.0, scale))

    # individual invariants -------------------------------------------------

    def validation(self):
        rep = validate_process(self.spec)
        return rep.valid, f"{len(rep.violations)} violation(s), waiver={rep.tenability_waived}"

    def balance_identity(self):
        f = UPolynomial.variable(self.sd.dimension, 1, Fraction(1) if self.exact else 1 + 0j)
        ns = [1, 2, 3, 10, 50]
        vals = exact_moment(f, ns, self.table)
        ok = all(self.close(v, n + self.spec.tau1 - 1) for v, n in zip(vals, ns))
        return ok, "E u1(X_n) = n + tau1 - 1"

    def spectrum_bound(self):
        bad = [lam for lam in self.sd.eigenvalues
               if lam != 1 and not float(complex(lam).real) < 1 - self.sd.tol]
        return not bad and self.sd.eigenvalues[0] == 1, "lambda_1 = 1 and Re lambda < 1 otherwise"

    def jordan_relation(self):
        sd = self.sd
        M = sd.replacement
        ok = linalg.is_zero_vector(sd.forms[0] - 1, self.exact, self.tol)
        for k in range(sd.dimension):
            r = M.dot(sd.forms[k]) - sd.eigenvalues[k] * sd.forms[k]
            if sd.eps[k]:
                r = r - sd.forms[k - 1]
            ok &= linalg.is_zero_vector(r, self.exact, self.tol)
        I = sd.forms.dot(sd.duals)
        ok &= linalg.is_zero_vector((I - linalg.identity(sd.dimension, self.exact)).reshape(-1), self.exact, self.tol)
        A = build_replacement_endomorphism(self.spec)
        T = linalg.as_numeric(A).T
        ok &= bool(np.allclose(linalg.as_numeric(M), T))
        return bool(ok), "A^T u_k = lambda_k u_k + eps_k u_(k-1), u_1 = sum of forms, duality"

    def phi_on_forms(self):
        s = self.sd.dimension
        ok = True
        for k in range(1, s + 1):
            f = UPolynomial.variable(s, k, Fraction(1) if self.exact else 1 + 0j)
            ok &= self.poly_zero(self.table.op.apply(f) - self.table.op.partial(f))
        return ok, "Phi agrees with its derivation part on linear forms"

    def phi_order(self):
        ok = True
        for alpha in self.alphas:
            mono = UPolynomial.monomial(alpha, Fraction(1) if self.exact else 1 + 0j)
            g = self.table.op.apply(mono) - mono * self.sd.pairing(alpha)
            if not self.exact:
                g = g.prune(self.tol)
            ok &= all(order_key(b) < order_key(alpha) for b in g.terms)
        return ok, "(Phi - <alpha,lambda>) u^alpha only has lower monomials"

    def reduced_properties(self):
        ok = True
        t = self.table
        for alpha in self.alphas:
            Q = t.reduced(alpha)
            z = self.sd.pairing(alpha)
            ok &= self.close(Q.coefficient(alpha), 1)
            ok &= all(order_key(b) <= order_key(alpha) for b in Q.terms)
            image = t.op.apply(Q) - Q * z
            coords = t.q_coordinates(image)
            for beta, c in coords.items():
                if not t.resonant(alpha, beta):
                    ok &= self.close(c, 0, Q.max_abs())
                else:
                    ok &= self.close(c, t.p[alpha].get(beta, 0), Q.max_abs())
            for beta in t.p[alpha]:
                ok &= order_key(beta) < order_key(alpha)
        return ok, "Q_alpha monic, triangular; (Phi - <alpha,lambda>) Q_alpha stays in its resonant span"

    def reconstruction(self):
        ok = True
        t = self.table
        for alpha in self.alphas:
            acc = t.reduced(alpha)
            for beta, qv in t.q[alpha].items():
                acc = acc + t.reduced(beta) * qv
            mono = UPolynomial.monomial(alpha, Fraction(1) if self.exact else 1 + 0j)
            ok &= self.poly_zero(acc - mono, t.reduced(alpha).max_abs())
        return ok, "u^alpha = Q_alpha + sum q_(alpha,beta) Q_beta"

    def refined_support(self):
        ok = True
        bad = []
        for alpha in self.alphas:
            self.table.reduced(alpha)
            for beta in self.table.q[alpha]:
                if not dominated_by(alpha, beta, self.sd):
                    ok = False
                    bad.append((alpha, beta))
        return ok, "every nonzero q_(alpha,beta) has beta in A_alpha - Sigma" + (f"; failures {bad[:3]}" if bad else "")

    def nilpotence(self):
        ok = True
        t = self.table
        for alpha in self.alphas:
            nu = t.nilpotence_by_iteration(alpha)
            Q = t.reduced(alpha)
            z = self.sd.pairing(alpha)
            scale = Q.max_abs()
            ok &= self.poly_zero(t.shifted_power(Q, z, nu + 1), scale)
            ok &= not self.poly_zero(t.shifted_power(Q, z, nu), scale)
            pc = classify_power(alpha, self.sd)
            if pc.large_power:
                ok &= nilpotence_index(alpha, t) == nu
                if pc.monogenic_power:
                    ok &= monogenic_nu(alpha, self.sd) == nu
        return ok, "(Phi - <alpha,lambda>)^(nu+1) Q_alpha = 0 with nu minimal"

    def polyhedra(self):
        ok = True
        for alpha in self.alphas:
            pts = a_alpha(alpha, self.sd)
            ok &= pts == a_alpha_by_sums(alpha, self.sd)
            z = self.sd.pairing(alpha)
            ok &= all(self.close(self.sd.pairing(p), z) for p in pts)
            if classify_power(alpha, self.sd).semisimple_power:
                ok &= pts == [tuple(alpha)]
        return ok, "A_alpha enumerations agree, keep <alpha,lambda>, are trivial for semisimple powers"

    def moment_oracle(self):
        ok = True
        t = self.table
        x1 = self.sd.forms_at(self.spec.initial)
        ns = list(range(1, 31))
        for alpha in self.alphas:
            if t.nilpotence_by_iteration(alpha):
                continue
            Q = t.reduced(alpha)
            z = self.sd.pairing(alpha)
            q0 = Q.evaluate(x1)
            vals = exact_moment(Q, ns, t)
            for n, v in zip(ns, vals):
                expect = gamma_eval(self.spec.tau1, n, z) * q0
                ok &= self.close(v, expect, abs(complex(expect)))
        return ok, "E Q_alpha(X_n) = gamma_n(<alpha,lambda>) Q_alpha(X1) for eigen reduced polynomials"

    def trajectory_balance(self):
        from .simulate import scaled_system

        n = 200
        sc = scaled_system(self.spec, n)
        path = simulate_path(self.spec, n, trial_generator(self.seed, 0))
        totals = path.sum(axis=1)
        expect = np.array([(k + self.spec.tau1 - 1) * sc.scale for k in range(1, n + 1)], dtype=float)
        if self.exact:
            ok = bool(np.all(totals == expect.astype(np.int64)))
        else:
            ok = bool(np.allclose(totals, expect))
        steps = np.diff(path, axis=0)
        incs = {tuple(r) for r in sc.increments.tolist()}
        ok &= all(tuple(r) in incs for r in steps.tolist())
        return ok, "sum of forms equals n + tau1 - 1 at every step; steps are increments"

    def seeded_simulation(self):
        s = self.sd.dimension
        cfg = SimConfig(50, 64, self.seed, (Estimand("u", tuple([1] + [0] * (s - 1))),), self.workers)
        a = estimate_moments(self.spec, cfg, self.sd)
        cfg1 = SimConfig(50, 64, self.seed, cfg.estimands, 1)
        b = estimate_moments(self.spec, cfg1, self.sd)
        st = a.stats[0]
        ok = a.to_dict()["estimates"] == b.to_dict()["estimates"]
        ok &= self.close(st.mean, 50 + self.spec.tau1 - 1) and st.se < 1e-9
        return ok, f"u1 estimate {st.mean.real!r} with zero spread; identical across worker counts"

    def classification(self):
        c = classify_process(self.sd)
        sig = self.sd.sigma2
        ok = (c.size_class == "Small") == (sig == float("-inf") or self.sd.real_le(sig, Fraction(1, 2)))
        return ok, f"{c.size_class}, sigma2 = {sig}, principally semisimple = {c.principally_semisimple}"


CHECKS: list[tuple[str, Callable]] = [
    ("validation", _Suite.validation),
    ("spectrum-bound", _Suite.spectrum_bound),
    ("jordan-relation", _Suite.jordan_relation),
    ("phi-on-linear-forms", _Suite.phi_on_forms),
    ("phi-lowers-order", _Suite.phi_order),
    ("reduced-polynomial-properties", _Suite.reduced_properties),
    ("reconstruction", _Suite.reconstruction),
    ("refined-support", _Suite.refined_support),
    ("nilpotence-index", _Suite.nilpotence),
    ("polyhedra", _Suite.polyhedra),
    ("balance-identity", _Suite.balance_identity),
    ("moment-oracle", _Suite.moment_oracle),
    ("trajectory-balance", _Suite.trajectory_balance),
    ("seeded-simulation", _Suite.seeded_simulation),
    ("classification", _Suite.classification),
]


def run_invariant_suite(spec: ProcessSpec, spectral: SpectralData, degree: int = 3,
                        seed: int = 20240601, workers: int = 1) -> list:
    suite = _Suite(spec, spectral, degree, seed, workers)
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(suite)
        except PolyaError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        except Exception as exc:  # report rather than abort the whole suite
            ok, detail = False, f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=2)}"
        out.append(Check(name, bool(ok), detail))
    return out
