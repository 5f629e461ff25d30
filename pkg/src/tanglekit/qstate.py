"""N-qubit pure states, marginals, state families and the JSON state file.

Basis convention: qubit 1 is the most significant bit, so the amplitude of
``|i_1 i_2 ... i_N>`` sits at index ``b = sum_m i_m 2**(N - m)``. Qubit
positions in the public API are 1-based.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

MAX_QUBITS = 12
NORM_TOL = 1e-12
FILE_NORM_TOL = 1e-6
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

BASIS_CONVENTION = "qubit 1 most significant: b = sum_m i_m * 2**(N - m)"


class StateError(ValueError):
    """Invalid state, density matrix, or qubit selection."""


class StateFileError(StateError):
    """State file that is unreadable or does not match the schema."""


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    n_qubits: int
    amplitudes: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.n_qubits
        if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
            raise StateError(f"n_qubits must be an integer in 1..{MAX_QUBITS}, got {n!r}")
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != 2**n:
            raise StateError(f"expected {2**n} amplitudes for {n} qubits, got {amps.size}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise StateError(f"state is not normalized (sum |a|^2 = {norm2!r})")
        object.__setattr__(self, "n_qubits", int(n))
        object.__setattr__(self, "amplitudes", amps)

    @property
    def tensor(self):
        """Amplitudes as an array with one axis of length 2 per qubit."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.n_qubits == other.n_qubits and np.array_equal(self.amplitudes, other.amplitudes)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix of a subset of qubits.

    ``factor`` is an optional matrix ``F`` with ``elements = F F^H``; marginals
    of pure states carry one built straight from the amplitudes so downstream
    spectra avoid square roots of roundoff-level eigenvalues.
    """

    n_qubits: int
    elements: np.ndarray
    qubit_labels: tuple = ()
    factor: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        rho = _frozen(self.elements)
        dim = 2**self.n_qubits
        if rho.shape != (dim, dim):
            raise StateError(f"expected a {dim}x{dim} matrix, got shape {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"density matrix trace is {tr!r}, expected 1")
        w = np.linalg.eigvalsh(rho)
        if w[0] < -PSD_TOL:
            raise StateError(f"density matrix has negative eigenvalue {w[0]!r}")
        labels = tuple(self.qubit_labels) or tuple(range(1, self.n_qubits + 1))
        if len(labels) != self.n_qubits:
            raise StateError("qubit_labels length does not match n_qubits")
        object.__setattr__(self, "elements", rho)
        object.__setattr__(self, "qubit_labels", labels)
        if self.factor is not None:
            object.__setattr__(self, "factor", _frozen(self.factor))

    @property
    def dim(self):
        return 2**self.n_qubits


def as_density(rho, n_qubits=None):
    """Coerce a raw matrix into a validated :class:`DensityMatrix`."""
    if isinstance(rho, DensityMatrix):
        return rho
    rho = np.asarray(rho, dtype=complex)
    if n_qubits is None:
        n_qubits = int(round(math.log2(rho.shape[0])))
    return DensityMatrix(n_qubits, rho)


@dataclass(frozen=True)
class MultiIndex:
    """Bit string over the traced-out qubits of a fixed (focus, j) pair.

    ``positions`` are the 1-based qubit positions in ascending order and
    ``bits`` the matching values. The integer value weights the first
    position most, consistent with the global basis ordering.
    """

    positions: tuple
    bits: tuple

    def __post_init__(self):
        if len(self.positions) != len(self.bits):
            raise StateError("positions and bits differ in length")
        if any(b not in (0, 1) for b in self.bits):
            raise StateError(f"bits must be 0/1, got {self.bits}")

    @property
    def value(self):
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v

    @classmethod
    def from_value(cls, value, positions):
        positions = tuple(positions)
        k = len(positions)
        if not 0 <= value < 2**k:
            raise StateError(f"index value {value} out of range for {k} traced qubits")
        return cls(positions, tuple((value >> (k - 1 - t)) & 1 for t in range(k)))


def _check_positions(positions, n, allow_empty=False):
    positions = [int(p) for p in positions]
    if not positions and not allow_empty:
        raise StateError("qubit selection is empty")
    if len(set(positions)) != len(positions):
        raise StateError(f"duplicate qubit positions in {positions}")
    bad = [p for p in positions if not 1 <= p <= n]
    if bad:
        raise StateError(f"qubit positions {bad} out of range 1..{n}")
    return positions


def make_state(coeffs, n):
    """Normalize ``coeffs`` into a PureState.

    Returns ``(state, norm)`` where ``norm`` is the factor divided out.
    """
    coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
    if coeffs.size != 2**n:
        raise StateError(f"length mismatch: {coeffs.size} coefficients for n={n}")
    norm = float(np.linalg.norm(coeffs))
    if norm == 0.0:
        raise StateError("cannot normalize the zero vector")
    return PureState(n, coeffs / norm), norm


def permute_qubits(state, order):
    """Relabel qubits: new qubit t is old qubit ``order[t-1]`` (1-based)."""
    order = _check_positions(order, state.n_qubits)
    if len(order) != state.n_qubits:
        raise StateError("permutation must list every qubit once")
    t = np.transpose(state.tensor, [p - 1 for p in order])
    return PureState(state.n_qubits, t.reshape(-1), dict(state.meta))


def focus_order(n, focus):
    """Qubit order putting ``focus`` first and keeping the rest ascending."""
    _check_positions([focus], n)
    return [focus] + [q for q in range(1, n + 1) if q != focus]


def amplitude_matrix(state, keep):
    """Amplitudes reshaped to (2**len(keep), 2**rest) with rows over ``keep``.

    Row index follows the order of ``keep``; the column index runs over the
    remaining qubits in ascending position, first one most significant.
    """
    keep = _check_positions(keep, state.n_qubits)
    rest = [q for q in range(1, state.n_qubits + 1) if q not in keep]
    t = np.transpose(state.tensor, [q - 1 for q in keep + rest])
    return t.reshape(2 ** len(keep), -1)


def marginal(state, keep):
    """Reduced density matrix of ``state`` on the ordered qubit list ``keep``."""
    psi = amplitude_matrix(state, keep)
    rho = psi @ psi.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    d, m = psi.shape
    if m > d:
        # psi^T = Q R  =>  psi = R^T Q^T and rho = R^T (R^T)^H
        _, r = np.linalg.qr(psi.T)
        factor = r.T
    else:
        factor = psi
    return DensityMatrix(len(keep), rho, tuple(int(q) for q in keep), factor)


def derive_seed(seed, *counters):
    """Counter-based child seed: a pure function of ``(seed, *counters)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(c) for c in counters]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def haar_random(n, seed):
    """Haar-random pure state from a normalized complex Gaussian vector."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
        raise StateError(f"n must be in 1..{MAX_QUBITS}, got {n!r}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF))
    z = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return PureState(int(n), z / np.linalg.norm(z), {"family": "haar", "seed": str(seed)})


# -- named families ---------------------------------------------------------

@dataclass(frozen=True)
class StateFamily:
    tag: str
    n: int
    params: tuple = ()


FAMILIES = ("ghz", "w", "product", "bell_times_rest", "haar", "gghz", "ghz_w")
# families with exactly one real parameter, usable in sweeps
SWEEPABLE = ("gghz", "ghz_w")


def _basis(n, bits):
    v = np.zeros(2**n, dtype=complex)
    v[int("".join(map(str, bits)), 2)] = 1.0
    return v


def _ghz_vec(n):
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


def _w_vec(n):
    v = np.zeros(2**n, dtype=complex)
    for m in range(n):
        v[1 << m] = 1 / math.sqrt(n)
    return v


def named_state(family):
    """Instantiate a :class:`StateFamily`.

    Parameters by tag:

    - ``ghz``, ``w``: none.
    - ``product``: optional per-qubit angles theta, each qubit
      ``cos(theta/2)|0> + sin(theta/2)|1>``; default all ``|0>``.
    - ``bell_times_rest``: optional pair positions (default 1, 2); Bell pair
      ``(|00> + |11>)/sqrt(2)`` on the pair, ``|0>`` elsewhere.
    - ``haar``: one seed.
    - ``gghz``: angle theta, ``cos(theta)|0..0> + sin(theta)|1..1>``.
    - ``ghz_w``: angle theta, ``cos(theta) GHZ_N + sin(theta) W_N`` renormalized.
    """
    tag, n, params = family.tag, family.n, tuple(family.params)
    if tag not in FAMILIES:
        raise StateError(f"unknown family {tag!r}; choose from {', '.join(FAMILIES)}")
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
        raise StateError(f"n must be in 1..{MAX_QUBITS}, got {n!r}")

    def arity(*allowed):
        if len(params) not in allowed:
            raise StateError(f"family {tag!r} takes {' or '.join(map(str, allowed))} parameters, got {len(params)}")

    if tag == "ghz":
        arity(0)
        if n < 2:
            raise StateError("ghz needs n >= 2")
        vec = _ghz_vec(n)
    elif tag == "w":
        arity(0)
        if n < 2:
            raise StateError("w needs n >= 2")
        vec = _w_vec(n)
    elif tag == "product":
        arity(0, n)
        thetas = [float(p) for p in params] or [0.0] * n
        vec = np.ones(1, dtype=complex)
        for th in thetas:
            vec = np.kron(vec, [math.cos(th / 2), math.sin(th / 2)])
    elif tag == "bell_times_rest":
        arity(0, 2)
        a, b = (int(p) for p in params) if params else (1, 2)
        _check_positions([a, b], n)
        vec = np.zeros(2**n, dtype=complex)
        bits = [0] * n
        vec[0] = 1 / math.sqrt(2)
        bits[a - 1] = bits[b - 1] = 1
        vec += _basis(n, bits) / math.sqrt(2)
    elif tag == "haar":
        arity(1)
        return haar_random(n, int(params[0]))
    elif tag == "gghz":
        arity(1)
        if n < 2:
            raise StateError("gghz needs n >= 2")
        th = float(params[0])
        vec = np.zeros(2**n, dtype=complex)
        vec[0], vec[-1] = math.cos(th), math.sin(th)
    else:  # ghz_w
        arity(1)
        if n < 2:
            raise StateError("ghz_w needs n >= 2")
        th = float(params[0])
        vec = math.cos(th) * _ghz_vec(n) + math.sin(th) * _w_vec(n)
    state, _ = make_state(vec, n)
    meta = {"family": tag}
    if params:
        meta["params"] = ",".join(repr(p) for p in params)
    return PureState(state.n_qubits, state.amplitudes, meta)


# -- state file --------------------------------------------------------------

STATE_SCHEMA = {
    "type": "object",
    "required": ["n_qubits", "amplitudes"],
    "properties": {
        "n_qubits": {"type": "integer", "minimum": 1, "maximum": MAX_QUBITS},
        "amplitudes": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "meta": {"type": "object", "additionalProperties": {"type": "string"}},
    },
    "additionalProperties": False,
}


def state_to_json(state):
    doc = {
        "n_qubits": state.n_qubits,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }
    if state.meta:
        doc["meta"] = {str(k): str(v) for k, v in state.meta.items()}
    return doc


def state_from_json(doc):
    try:
        jsonschema.validate(doc, STATE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise StateFileError(f"schema violation: {exc.message}") from None
    n = doc["n_qubits"]
    pairs = doc["amplitudes"]
    if len(pairs) != 2**n:
        raise StateFileError(f"schema violation: {len(pairs)} amplitudes for n_qubits={n}")
    amps = np.array([complex(re, im) for re, im in pairs])
    norm2 = float(np.vdot(amps, amps).real)
    if abs(norm2 - 1.0) > FILE_NORM_TOL:
        raise StateFileError(f"state is not normalized (sum |a|^2 = {norm2!r}); refusing to renormalize")
    if abs(norm2 - 1.0) > NORM_TOL:
        amps = amps / math.sqrt(norm2)
    return PureState(n, amps, dict(doc.get("meta", {})))


def write_state_file(state, path):
    Path(path).write_text(json.dumps(state_to_json(state), indent=1) + "\n")


def read_state_file(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError) as exc:
        raise StateFileError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise StateFileError(f"malformed JSON in {path}: {exc}") from None
    return state_from_json(doc)
