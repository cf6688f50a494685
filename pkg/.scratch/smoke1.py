import sys
sys.path.insert(0, "/root/pkg/src")
import numpy as np
from tvjko.grid_density import GridSpec, GridDensity, quantile, total_variation
from tvjko.transport1d import transport, w2_squared
from tvjko.tv_prox import taut_string_solve, tv_prox, ProxProblem, prox_kkt_residual
from tvjko.oracles import (tv_prox_reference, w2_quadrature_reference,
                           w2_assignment_reference, transport_gradient_fd)

rng = np.random.default_rng(0)

# uniform pair on [-4,4], N=1024: W2^2 = (a-b)^2/3
g = GridSpec(-4.0, 4.0, 1024)
def uni(a):
    v = np.where(np.abs(g.centers) < a, 1.0 / (2 * a), 0.0)
    return GridDensity(g, v)
r0, r1 = uni(1.0), uni(2.0)
w2 = w2_squared(r0, r1)
print("uniform pair:", w2, "expected", 1.0 / 3.0, "err", abs(w2 - 1/3))

# translation: shift by 0.5 (64 cells)
v = np.where(np.abs(g.centers) < 1, 0.5, 0.0)
vs = np.roll(v, 64)
w2t = w2_squared(GridDensity(g, v), GridDensity(g, vs))
print("translation:", w2t, "expected 0.25, err", abs(w2t - 0.25))

# symmetry + self distance
a = rng.random(1024) + 0.01
b = rng.random(1024) + 0.01
ra = GridDensity.normalized(g, a); rb = GridDensity.normalized(g, b)
print("symmetry err:", abs(w2_squared(ra, rb) - w2_squared(rb, ra)))
print("self:", w2_squared(ra, ra))

# potential: phi' = x - T, zero mean
td = transport(rb, ra)
dphi = np.diff(td.potential) / g.dx
disp = g.centers - td.map_values
mid = 0.5 * (disp[1:] + disp[:-1])
print("phi' err:", np.max(np.abs(dphi - mid)), "mean:", abs(td.potential.mean()) * g.dx)

# quadrature oracle on positive pair
q = w2_quadrature_reference(ra, rb)
print("quadrature rel err:", abs(q - w2_squared(ra, rb)) / q)

# assignment oracle: small grid, rational masses
gs = GridSpec(0.0, 1.0, 8)
K = 32
c0 = np.array([4, 4, 4, 4, 4, 4, 4, 4]); c1 = np.array([8, 8, 4, 4, 2, 2, 2, 2])
d0 = GridDensity(gs, c0 / K / gs.dx); d1 = GridDensity(gs, c1 / K / gs.dx)
lp = w2_assignment_reference(d0, d1, K)
ex = w2_squared(d0, d1)
print("assignment:", lp, "exact:", ex, "rel:", abs(lp - ex) / max(ex, 1e-30))

# gradient check
d = rng.standard_normal(1024); d -= d.mean()
an, fd = transport_gradient_fd(ra, rb, d, 1e-5)
print("gradient rel:", abs(an - fd) / max(abs(an), 1e-30))

# taut string vs reference, unweighted + weighted
worst = 0.0; worstk = 0.0; fails = 0
for trial in range(300):
    n = rng.integers(1, 40)
    y = rng.standard_normal(n) * rng.uniform(0.1, 5)
    tube = rng.uniform(0.01, 3, size=max(n - 1, 0))
    if rng.random() < 0.5:
        w = rng.uniform(0.2, 4, size=n)
    else:
        w = None
    u = taut_string_solve(y, tube, w)
    worstk = max(worstk, prox_kkt_residual(u, y, tube, w))
    ref = tv_prox_reference(y, tube, w)
    if ref is None:
        fails += 1
        continue
    worst = max(worst, np.max(np.abs(u - ref)))
print("taut string: worst dev", worst, "worst kkt", worstk, "oracle unverified", fails)

# ProxProblem wrapper
p = ProxProblem(input=rng.standard_normal(50), lam=0.7)
u = tv_prox(p)
print("wrapper kkt:", prox_kkt_residual(u, p.input, p.tube()))

# quantile tie rule
gq = GridSpec(0.0, 1.0, 2)
rq = GridDensity(gq, np.array([0.0, 2.0]))
print("tie quantile(0):", quantile(rq, 0.0), "expected 0.5")
print("tv:", total_variation(rq))
