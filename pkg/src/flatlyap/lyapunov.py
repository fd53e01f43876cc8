"""Exact Lyapunov-sum formulas and Monte-Carlo exponent estimation.

The exact side is rational arithmetic on stratum data and orbit cylinder
decompositions.  The Monte-Carlo side codes the geodesic flow by continued
fractions: each digit a of a Gauss-distributed sample acts by the h^a
monodromy followed by r, the evolving frame is QR-renormalized at every
step, and hyperbolic time is the log-continuant of the digits, tracked in
log space.  The identical pipeline run on the defining 2-dimensional
representation serves as the normalization audit and must return a top
exponent of 1.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cyclotomic import complex_embed
from .surface import Stratum, horizontal_cylinders


# ---------------------------------------------------------------------------
# exact formulas
# ---------------------------------------------------------------------------

def ekz_sum(st: Stratum, carea_hat: Fraction) -> Fraction:
    """Sum of the nonnegative exponents from the stratum and the area term.

    ``carea_hat`` denotes (pi^2/3) * c_area.  Both the quadratic and the
    Abelian shape of the formula are exact rationals.
    """
    return st.ekz_local_term() + Fraction(carea_hat)


def carea_from_orbit(nodes) -> Fraction:
    """(pi^2/3) * c_area of an arithmetic curve, from its orbit's cylinders.

    ``nodes`` is an OrbitGraph or an iterable of surfaces; the value is the
    orbit average of sum(height/width) over horizontal cylinders.
    """
    surfaces = getattr(nodes, "nodes", nodes)
    total = Fraction(0)
    count = 0
    for surface in surfaces:
        count += 1
        for cyl in horizontal_cylinders(surface).cylinders:
            total += Fraction(cyl.height, cyl.width)
    return total / count


def carea_genus0(st: Stratum) -> Fraction:
    """(pi^2/3) * c_area for a genus-zero quadratic stratum."""
    if st.genus != 0 or st.kind != "quadratic":
        raise ValueError("closed form requires a genus-zero quadratic stratum")
    return -Fraction(1, 24) * sum(Fraction(d * (d + 4), d + 2) for d in st.orders)


def sum_lambda_cover(n: int, d: int) -> Fraction:
    """Exponent sum over the locus of degree-d covers of Q(n-5, -1^(n-1))."""
    if d < 3 or n % d:
        raise ValueError("need d >= 3 and d | n")
    if d % 2:
        return Fraction((d * d - 1) * (n - 2), 12 * d)
    return Fraction((n - 2) * (d * d * (n - 3) + 2 * n), 12 * d * (n - 3))


def validate_pu_spectrum(spectrum, p, q, tol):
    """Check symmetry and the zero-block of a pseudo-unitary spectrum.

    Passes iff the sorted spectrum is symmetric under sign change within
    ``tol`` and contains at least |p - q| entries of magnitude below tol.
    """
    spectrum = sorted(spectrum, reverse=True)
    if len(spectrum) != p + q:
        raise ValueError("spectrum length does not match the signature")
    n = len(spectrum)
    symmetric = all(abs(spectrum[i] + spectrum[n - 1 - i]) <= tol for i in range(n))
    zeros = sum(1 for x in spectrum if abs(x) <= tol)
    return {
        "symmetric": symmetric,
        "zero_count": zeros,
        "required_zeros": abs(p - q),
        "pass": bool(symmetric and zeros >= abs(p - q)),
    }


# ---------------------------------------------------------------------------
# cocycles over the orbit graph
# ---------------------------------------------------------------------------

class GraphCocycle:
    """h- and r-step matrices over the nodes of an orbit graph.

    ``h_next[v]``/``r_next[v]`` give the target nodes, ``h_mats``/``r_mats``
    the complex step matrices, and ``forms`` (optional) the invariant
    Hermitian form per node, used by the isometry probe.
    """

    def __init__(self, h_next, r_next, h_mats, r_mats, forms=None):
        self.h_next = list(h_next)
        self.r_next = list(r_next)
        self.h_mats = [np.asarray(m, dtype=complex) for m in h_mats]
        self.r_mats = [np.asarray(m, dtype=complex) for m in r_mats]
        self.forms = forms
        self.dim = self.h_mats[0].shape[0]
        self._cusp = {}

    @classmethod
    def defining(cls):
        """The tautological 2-dimensional representation of the generators."""
        return cls([0], [0], [np.array([[1, 1], [0, 1]])],
                   [np.array([[0, -1], [1, 0]])],
                   forms=None)

    @classmethod
    def from_monodromy(cls, rep, k=None):
        """Cocycle of a MonodromyRep; full homology if k is None."""
        nv = rep.n_nodes
        h_next = [rep.h_map[v] for v in range(nv)]
        r_next = [rep.r_map[v] for v in range(nv)]
        if k is None:
            h_mats = [np.array(rep.edge_matrix[(v, "h")], dtype=complex)
                      for v in range(nv)]
            r_mats = [np.array(rep.edge_matrix[(v, "r")], dtype=complex)
                      for v in range(nv)]
            forms = None
        else:
            h_mats = [complex_embed(rep.restricted_step(v, "h", k)[0])
                      for v in range(nv)]
            r_mats = [complex_embed(rep.restricted_step(v, "r", k)[0])
                      for v in range(nv)]
            forms = [complex_embed(rep.isotypic(v, k).gram) for v in range(nv)]
        return cls(h_next, r_next, h_mats, r_mats, forms)

    def _cusp_data(self, v):
        """Prefix products around the h-cycle through v."""
        if v in self._cusp:
            return self._cusp[v]
        prefixes = [np.eye(self.dim, dtype=complex)]
        nodes = [v]
        cur = v
        mat = np.eye(self.dim, dtype=complex)
        while True:
            mat = self.h_mats[cur] @ mat
            cur = self.h_next[cur]
            if cur == v:
                break
            prefixes.append(mat)
            nodes.append(cur)
        self._cusp[v] = (nodes, prefixes, mat)  # mat = full cycle at v
        return self._cusp[v]

    def h_power(self, v, a):
        """(matrix, node) of h^a applied at node v; a may be negative."""
        nodes, prefixes, cycle = self._cusp_data(v)
        width = len(nodes)
        q, rem = divmod(a, width)
        mat = prefixes[rem]
        if q:
            mat = mat @ np.linalg.matrix_power(cycle, q)
        return mat, nodes[rem]

    def r_step(self, v):
        return self.r_mats[v], self.r_next[v]


# ---------------------------------------------------------------------------
# the estimator
# ---------------------------------------------------------------------------

@dataclass
class SpectrumReport:
    exponents: list
    stderr: list
    signature: tuple
    zero_count: int
    calibration: float
    digits: int
    seed: int
    trials: int
    hyperbolic_time: float
    final_frame: object = field(default=None, repr=False)
    final_node: int = 0
    frame_order: list = field(default_factory=list, repr=False)

    def to_json(self):
        return {
            "exponents": [float(x) for x in self.exponents],
            "stderr": [float(x) for x in self.stderr],
            "signature": list(self.signature),
            "zero_count": self.zero_count,
            "calibration": float(self.calibration),
            "digits": self.digits,
            "seed": self.seed,
            "trials": self.trials,
            "hyperbolic_time": float(self.hyperbolic_time),
        }


_DIGIT_CAP = 1 << 40   # protects float matrix powers; tail mass ~ 1e-12


def _gauss_sample(rng):
    """Sample from the Gauss measure dx/((1+x) ln 2) on (0,1)."""
    return 2.0 ** rng.random() - 1.0


def _trial(cocycle: GraphCocycle, digits, rng, start, refresh=40):
    """One trajectory: returns (log-stretches, hyperbolic time, frame, node).

    Digits act as h^(+a) then r at odd positions and h^(-a) then r at even
    ones, so that consecutive pairs compose to the positive vertical shear
    r h^(-a) r; this is the cutting-sequence word of the coded geodesic.
    """
    dim = cocycle.dim
    frame = np.eye(dim, dtype=complex)
    acc = np.zeros(dim)
    node = start
    total_time = 0.0
    done = 0
    while done < digits:
        x = _gauss_sample(rng)
        lq_prev, lq = 0.0, None   # log continuants q_{k-1}, q_k
        for _ in range(min(refresh, digits - done)):
            a = int(1.0 / x)
            if a < 1:
                a = 1
            if a > _DIGIT_CAP:
                a = _DIGIT_CAP
            x = 1.0 / x - a
            if not 0.0 < x < 1.0:
                x = _gauss_sample(rng)
            la = math.log(a)
            if lq is None:
                lq = la
            else:
                lq_prev, lq = lq, lq + math.log(a + math.exp(lq_prev - lq))
            mat, node = cocycle.h_power(node, a if done % 2 == 0 else -a)
            frame = mat @ frame
            mat, node = cocycle.r_step(node)
            frame = mat @ frame
            frame, rmat = np.linalg.qr(frame)
            acc += np.log(np.abs(np.diag(rmat)))
            done += 1
        total_time += lq
    return acc, total_time, frame, node


def estimate_exponents(cocycle: GraphCocycle, max_digits=16384, trials=64,
                       seed=0, start=0, signature=None, calibrate=True,
                       threads=None):
    """Monte-Carlo Lyapunov spectrum of a graph cocycle.

    Per trial, continued-fraction digits of Gauss-distributed samples drive
    the walk; a fresh sample is drawn every 40 digits.  Exponents are the
    accumulated QR log-stretches divided by the hyperbolic time (the log of
    the digit continuant).  Trials use per-index derived seeds, so results
    do not depend on scheduling.
    """
    if max_digits < 1 or trials < 1:
        raise ValueError("max_digits and trials must be positive")
    if threads is None:
        threads = int(os.environ.get("FLATLYAP_THREADS", "1"))

    def run(t):
        rng = np.random.default_rng([seed, t])
        return _trial(cocycle, max_digits, rng, start)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]

    per_trial = np.array([acc / time for (acc, time, _f, _n) in results])
    total_time = float(sum(time for (_a, time, _f, _n) in results))
    mean = per_trial.mean(axis=0)
    stderr = (per_trial.std(axis=0, ddof=1) / math.sqrt(trials)
              if trials > 1 else np.zeros_like(mean))

    calibration = 1.0
    if calibrate:
        cal = estimate_exponents(GraphCocycle.defining(),
                                 max_digits=min(max_digits, 4096),
                                 trials=min(trials, 16), seed=seed,
                                 calibrate=False, threads=threads)
        calibration = cal.exponents[0]

    order = np.argsort(mean)[::-1]
    tol = 3.0 * float(max(stderr.max(), 1e-9)) if trials > 1 else 1e-2
    zero_count = int(np.sum(np.abs(mean) < tol))
    _acc, _t, frame, node = results[-1]
    return SpectrumReport(
        exponents=[float(mean[i]) for i in order],
        stderr=[float(stderr[i]) for i in order],
        signature=tuple(signature) if signature else (),
        zero_count=zero_count,
        calibration=float(calibration),
        digits=max_digits * trials,
        seed=seed,
        trials=trials,
        hyperbolic_time=total_time,
        final_frame=frame,
        final_node=node,
        frame_order=[int(i) for i in order],
    )


def neutral_isometry_probe(cocycle: GraphCocycle, report: SpectrumReport,
                           tol=None):
    """Definiteness of the invariant form on the estimated neutral span.

    Takes the frame vectors belonging to near-zero exponents and evaluates
    the node's Hermitian form on their span; passes when the restriction is
    numerically definite.  An empty neutral span passes vacuously.
    """
    if cocycle.forms is None:
        raise ValueError("cocycle carries no invariant form")
    if tol is None:
        tol = max(3.0 * max(report.stderr, default=0.0), 0.02)
    neutral_idx = [report.frame_order[pos]
                   for pos, lam in enumerate(report.exponents)
                   if abs(lam) < tol]
    frame = report.final_frame
    if frame is None:
        raise ValueError("report carries no frame")
    dim = frame.shape[0]
    cols = frame[:, neutral_idx] if neutral_idx else np.zeros((dim, 0))
    if cols.shape[1] == 0:
        return {"neutral_dim": 0, "definite": True, "vacuous": True,
                "eigenvalues": []}
    h = cocycle.forms[report.final_node]
    gram = cols.conj().T @ h @ cols
    gram = (gram + gram.conj().T) / 2
    eig = np.linalg.eigvalsh(gram)
    definite = bool(np.all(eig > 0) or np.all(eig < 0))
    conditioned = bool(np.min(np.abs(eig)) > 1e-6 * np.max(np.abs(eig)))
    return {
        "neutral_dim": int(cols.shape[1]),
        "definite": definite and conditioned,
        "vacuous": False,
        "eigenvalues": [float(x) for x in eig],
    }
