import sys, time
import numpy as np

sys.path.insert(0, "/root/pkg/src")
from tvjko.grid_density import GridSpec, GridDensity
from tvjko.analytic_reference import hat_ramp_density, hat_solution
from tvjko.jko_solver import JkoConfig, jko_step, _entropy_simplex_prox
from scipy.special import wrightomega

# sanity: wrightomega real dtype and identity w + log w = y
y = np.array([-800.0, -5.0, 0.0, 7.0, 2.0e5, 1.0e17])
w = wrightomega(y)
print("wrightomega dtype:", w.dtype, "vals:", w)
chk = w + np.log(np.maximum(w, 1e-320)) - y
print("identity residual:", np.max(np.abs(chk[w > 0])))

# sanity: entropic prox alone (small instance, compare against brute scipy)
rng = np.random.default_rng(0)
n = 40
wts = np.full(n, 4.0 / n)
p = rng.normal(0.3, 0.4, n)
a = 3.7e-5
st = [0.0]
u = _entropy_simplex_prox(p, wts, a, st)
print("prox mass:", np.sum(wts * u), "min u:", u.min())
# KKT: u + a log u - p + a + theta = 0 where u > 0
ok = u > 0
kkt = u[ok] + a * np.log(u[ok]) - p[ok] + a + st[0]
print("prox KKT resid:", np.max(np.abs(kkt)))

tau = 1.0 / 270.0
grid = GridSpec(-2.0, 2.0, 2048)
rho0 = hat_ramp_density(grid)
hs = hat_solution(tau)
print("beta:", hs.beta, "plateau:", hs.plateau_height)

for h in (1e-1, 1e-2, 1e-3):
    t0 = time.time()
    res = jko_step(rho0, JkoConfig(tau=tau, entropy_h=h))
    dt = time.time() - t0
    c = res.certificate
    v = res.rho1.values
    x = grid.centers
    ramp = (np.abs(x) > hs.beta + 0.05) & (np.abs(x) < 0.95)
    drive = res.transport.potential / tau + h * (1.0 + np.log(np.maximum(v, 1e-300)))
    dc = drive[ramp & (v > 1e-12)] - c.c_fit
    print(f"h={h:g}: conv={res.converged} it={res.iterations_used} {dt:.1f}s "
          f"el={c.residual_el:.2e} maxz={c.max_abs_z:.6f} align={c.jump_alignment:.2e} "
          f"compl={c.complementarity:.2e} betaneg={c.beta_negativity:.2e}")
    print(f"   plateau mean={v[np.abs(x) < hs.beta - 0.05].mean():.6f} "
          f"(target {hs.plateau_height:.6f})  ramp |drive-c| max={np.max(np.abs(dc)):.2e} "
          f"min rho={v.min():.2e}")
