"""Scratch: verify closed forms and algorithm prototypes before freezing them."""
import numpy as np

# ---------- hat case ----------
def hat_check(beta):
    # rho0 = (1-|x|)+, rho1 has plateau 1-beta/2 on |x|<beta then 1-|x|
    h = 1.0 - beta / 2.0
    # T on [0, beta): 1 - sqrt(1 - x(2-beta)); T = x beyond
    # check pushforward: integral of rho1 on [0,x] equals integral rho0 on [0,T(x)]
    xs = np.linspace(0, beta * 0.999, 7)
    T = 1 - np.sqrt(1 - xs * (2 - beta))
    lhs = h * xs
    rhs = T - T**2 / 2
    err_push = np.max(np.abs(lhs - rhs))

    # phi on [0,1]: x^2/2 - x - (1 - x(2-beta))^{3/2}/(3(1-beta/2)) + C for x < beta
    C = -beta**2 / 2 + beta + 2 * (1 - beta) ** 3 / (3 * (2 - beta))
    def phi(x):
        x = np.asarray(x, dtype=float)
        out = np.where(
            x < beta,
            x**2 / 2 - x - (1 - x * (2 - beta)) ** 1.5 / (3 * (1 - beta / 2)) + C,
            0.0,
        )
        return out
    # phi' should equal x - T(x) on [0, beta)
    xs2 = np.linspace(0.01, beta * 0.98, 9)
    eps = 1e-6
    dphi = (phi(xs2 + eps) - phi(xs2 - eps)) / (2 * eps)
    T2 = 1 - np.sqrt(1 - xs2 * (2 - beta))
    err_phi = np.max(np.abs(dphi - (xs2 - T2)))

    # tau(beta) from the closed form
    tau = (
        beta**3 / 3
        - beta**2 / 2
        + 4 * (1 - (1 - beta) ** 5) / (15 * (2 - beta) ** 2)
        - 2 * (1 - beta) ** 3 * beta / (3 * (2 - beta))
    )

    # z formula with the (2-beta) bracket; tau*z(x) on [0, beta]
    def tau_z(x):
        x = np.asarray(x, dtype=float)
        return (
            -(x**3) / 6
            + x**2 / 2
            - (4 / (15 * (2 - beta) ** 2)) * (1 - x * (2 - beta)) ** 2.5
            + (beta**2 / 2 - beta - 2 * (1 - beta) ** 3 / (3 * (2 - beta))) * x
            + 4 / (15 * (2 - beta) ** 2)
        )
    # z(0) = 0, z(beta) = tau (so z=1 at the jump), tau*z' = -phi on [0,beta]
    z0 = tau_z(0.0)
    zb = tau_z(beta) - tau
    xs3 = np.linspace(0.01, beta * 0.98, 9)
    dz = (tau_z(xs3 + eps) - tau_z(xs3 - eps)) / (2 * eps)
    err_z = np.max(np.abs(dz + phi(xs3)))
    return err_push, err_phi, float(z0), float(zb), err_z, tau

for b in (0.25, 0.5, 0.75):
    print("hat beta=%.2f:" % b, ["%.3e" % v for v in hat_check(b)])
print("tau(1/2)*270 =", hat_check(0.5)[5] * 270)
print("tau(1)*10 =", (1/3 - 1/2 + 4/15) * 10)

# tau(beta) monotone on [0,1]?
bs = np.linspace(1e-6, 1.0, 20001)
taus = (
    bs**3 / 3 - bs**2 / 2
    + 4 * (1 - (1 - bs) ** 5) / (15 * (2 - bs) ** 2)
    - 2 * (1 - bs) ** 3 * bs / (3 * (2 - bs))
)
print("tau monotone:", np.all(np.diff(taus) > 0), "tau(1) =", taus[-1])

# ---------- uniform case ----------
from scipy.optimize import brentq
tau = 1.0 / 3.0
a0 = 1.0
a1 = brentq(lambda a: a * a * (a - a0) - 3 * tau, a0, a0 + 3, xtol=1e-15)
print("alpha1 =", repr(a1))
# phi(x) = ((a1-a0)/(2a1)) x^2 - 3tau/(2a1); check phi(a1) = 0 and d/dx phi = x - T
print("phi(a1) =", ((a1 - a0) / (2 * a1)) * a1**2 - 3 * tau / (2 * a1))
# T maps rho1 -> rho0: T(x) = (a0/a1) x; phi' = x - T = x(1 - a0/a1) = x(a1-a0)/a1 OK
# z: tau*z1 = -((a1-a0)/(6a1)) x^3 + 3tau x/(2a1); z1(a1) should be 1
z_a1 = (-((a1 - a0) / (6 * a1)) * a1**3 + 3 * tau * a1 / (2 * a1)) / tau
print("z(a1) =", z_a1)
print("closed form alpha(t) at t=1:", (1 + 9) ** (1 / 3))
