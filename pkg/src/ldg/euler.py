"""
Equidimensional (Euler) ODEs A s'' + B s'/r + C s/r^2 = 0.

Substituting s = r^alpha gives the indicial quadratic
A alpha^2 + (B - A) alpha + C = 0, whose roots fix one of three
solution forms.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EulerSolutionForm:
    """Classified general solution of A s'' + B s'/r + C s/r^2 = 0.

    kind is ``"distinct"`` (gamma1 r^a1 + gamma2 r^a2), ``"repeated"``
    ((gamma1 + gamma2 ln r) r^a) or ``"complex"``
    (r^a1 (gamma1 cos(a2 ln r) + gamma2 sin(a2 ln r))).  For the complex
    case ``exponents`` holds (a1, a2), the real and imaginary parts.
    """
    A: float
    B: float
    C: float
    kind: str
    exponents: tuple

    def basis(self, r):
        """The two basis solutions and their first and second derivatives at r."""
        r = np.asarray(r, dtype=float)
        L = np.log(r)
        if self.kind == "distinct":
            out = []
            for a in self.exponents:
                out.append((r**a, a * r**(a - 1), a * (a - 1) * r**(a - 2)))
            return out
        if self.kind == "repeated":
            a = self.exponents[0]
            u = (r**a, a * r**(a - 1), a * (a - 1) * r**(a - 2))
            # v = r^a ln r
            v = (r**a * L,
                 r**(a - 1) * (a * L + 1),
                 r**(a - 2) * (a * (a - 1) * L + 2 * a - 1))
            return [u, v]
        a, b = self.exponents
        c, s = np.cos(b * L), np.sin(b * L)
        # d/dr of r^a g(b ln r) = r^(a-1) (a g + b g')
        u = (r**a * c,
             r**(a - 1) * (a * c - b * s),
             r**(a - 2) * ((a * (a - 1) - b**2) * c - (2 * a - 1) * b * s))
        v = (r**a * s,
             r**(a - 1) * (a * s + b * c),
             r**(a - 2) * ((a * (a - 1) - b**2) * s + (2 * a - 1) * b * c))
        return [u, v]

    def evaluate(self, r, gamma1, gamma2):
        (u, _, _), (v, _, _) = self.basis(r)
        return gamma1 * u + gamma2 * v

    def verify(self, r):
        """Max ODE residual of both basis functions at the radii r, scaled by |A| s/r^2."""
        r = np.asarray(r, dtype=float)
        worst = 0.0
        for f, df, d2f in self.basis(r):
            res = self.A * d2f + self.B * df / r + self.C * f / r**2
            scale = (abs(self.A) + abs(self.B) + abs(self.C)) * (
                np.abs(f) / r**2 + np.abs(df) / r + np.abs(d2f))
            worst = max(worst, float(np.max(np.abs(res) / np.maximum(scale, 1e-300))))
        return worst


def euler_ode_exponents(A, B, C, tol=1e-14):
    """Classify A s'' + B s'/r + C s/r^2 = 0 by its indicial roots.

    Raises
    ------
    ValueError
        If A = 0; the equation is then first order.
    """
    A, B, C = float(A), float(B), float(C)
    if A == 0:
        raise ValueError("A = 0: degenerate, reduce to the first-order equation")
    b = (B - A) / A
    c = C / A
    disc = b * b - 4 * c
    if abs(disc) <= tol * max(1.0, b * b, abs(c)):
        return EulerSolutionForm(A, B, C, "repeated", (-b / 2 + 0.0, -b / 2 + 0.0))
    if disc > 0:
        root = np.sqrt(disc)
        # avoid cancellation in the smaller root
        q = -0.5 * (b + np.copysign(root, b)) if b != 0 else 0.5 * root
        lo, hi = sorted((q, c / q))
        return EulerSolutionForm(A, B, C, "distinct", (float(hi), float(lo)))
    return EulerSolutionForm(A, B, C, "complex", (-b / 2 + 0.0, float(np.sqrt(-disc) / 2)))
