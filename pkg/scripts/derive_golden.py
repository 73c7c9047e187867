#!/usr/bin/env python3
"""Stand-alone derivation of the golden constants frozen into the test suite.

Every value printed here is computed from first principles (closed forms,
quadrature, or plain arithmetic) without importing the package, so the test
expectations have a provenance independent of the code under test.

Run:  python scripts/derive_golden.py
"""

import math

import numpy as np
from scipy.integrate import quad


def line(name, value, note=""):
    print(f"{name:<42s} = {value!r}   {note}")


# --- Ornstein-Uhlenbeck closed forms -------------------------------------
# sigma2(s) = (1 - exp(-2 a s)) / (2 a)
# mean of the kernel-smoothed numerator at bandwidth e:
#   (2 pi (e^2 exp(-2 a (T - t*)) + sigma2(T)))^{-1/2}
#       * exp(-(exp(-a T) x - y)^2 / (2 (e^2 exp(-2 a (T-t*)) + sigma2(T))))


def ou_sigma2(a, s):
    return (1.0 - math.exp(-2.0 * a * s)) / (2.0 * a)


def ou_numerator_mean(a, x, y, T, t_star, eps):
    B = eps * eps * math.exp(-2.0 * a * (T - t_star))
    A = (math.exp(-a * T) * x - y) ** 2
    v = B + ou_sigma2(a, T)
    return math.exp(-A / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)


def ou_numerator_variance(a, x, y, T, t_star, eps, N):
    s2T = ou_sigma2(a, T)
    s2d = ou_sigma2(a, T - t_star)
    A = (math.exp(-a * T) * x - y) ** 2
    B = eps * eps * math.exp(-2.0 * a * (T - t_star))
    t1 = -(2.0 * N - 1.0) / (2.0 * math.pi * N**2 * (B + s2T)) * math.exp(-A / (B + s2T))
    t2 = (
        (N - 1.0)
        / (2.0 * math.pi * N**2 * math.sqrt(B + s2d) * math.sqrt(B + 2.0 * s2T - s2d))
        * math.exp(-A / (B + 2.0 * s2T - s2d))
    )
    t3 = (
        (N - 1.0)
        / (2.0 * math.pi * N**2 * math.sqrt(B + s2T - s2d) * math.sqrt(B + s2T + s2d))
        * math.exp(-A / (B + s2T + s2d))
    )
    t4 = (
        math.exp(a * (T - t_star))
        / (2.0 * math.pi * N**2 * eps * math.sqrt(B + 2.0 * s2T))
        * math.exp(-A / (B + 2.0 * s2T))
    )
    return t1 + t2 + t3 + t4


line("ou_mean(a=1,T=1,t*=.5,x=y=0,eps=0)", ou_numerator_mean(1, 0, 0, 1, 0.5, 0.0))
line("ou_mean(a=1,T=1,t*=.5,x=y=0,eps=.1)", ou_numerator_mean(1, 0, 0, 1, 0.5, 0.1))
line(
    "ou_var(a=1,T=1,t*=.5,x=y=0,eps=.1,N=1000)",
    ou_numerator_variance(1, 0, 0, 1, 0.5, 0.1, 1000),
)
line("ou_sigma2(a=1,s=1)", ou_sigma2(1.0, 1.0))

# Cross-check the OU mean at eps=0 against the transition density by quadrature:
# integral over y' of p(t*, y', T, y) equals exp(a (T - t*)) (reverse identity).
a = 1.0
T, t_star, y = 1.0, 0.5, 0.0


def ou_density(t, x0, s, y0, a=1.0):
    v = ou_sigma2(a, s - t)
    mu = math.exp(-a * (s - t)) * x0
    return math.exp(-((y0 - mu) ** 2) / (2.0 * v)) / math.sqrt(2.0 * math.pi * v)


val, err = quad(lambda yp: ou_density(t_star, yp, T, y), -40, 40)
line("int p(t*,y',T,0) dy'", val, f"(expect exp(a(T-t*)) = {math.exp(a * (T - t_star))!r})")

# --- Heston reverse coefficients (plug parameters into the printed forms) --
mu, gamma, beta, xi, rho = 0.05, -0.15, -0.045, 0.3, -0.7
S, v = 10.0, 0.25
alpha1 = (2.0 * v + rho * xi - mu) * S
alpha2 = (rho * xi - gamma) * v + xi**2 - beta
c_rate = v + rho * xi - mu - gamma
line("heston alpha(10,0.25)", (alpha1, alpha2))
line("heston c(10,0.25)", c_rate)

# Heston b = sigma sigma^T derivatives by hand (b11=v S^2, b12=b21=rho xi v S, b22=xi^2 v)
db = np.array([[2.0 * v * S, rho * xi * S], [rho * xi * v, xi**2]])
d2b = np.array([[2.0 * v, rho * xi], [rho * xi, 0.0]])
da = np.array([mu, gamma])
line("heston db (rows i, cols j = d b_ij / d x_j)", db.tolist())
line("heston d2b (d^2 b_ij / d x_i d x_j)", d2b.tolist())
line("heston da (d a_i / d x_i)", da.tolist())
line("alpha from bundle", (db.sum(axis=1) - np.array([mu * S, gamma * v + beta])).tolist())
line("c from bundle", 0.5 * d2b.sum() - da.sum())

# --- Kernel constants -------------------------------------------------------
d = 2
line("gaussian K(0), d=2", (2.0 * math.pi) ** (-d / 2))
eta = 1e-3
r = math.sqrt(-2.0 * math.log(eta * (2.0 * math.pi) ** (d / 2)))
line("gauss truncation radius d=2 eta=1e-3", r)
line("K(r) check", (2.0 * math.pi) ** (-1) * math.exp(-r * r / 2.0), "(expect 1e-3)")
eta1 = 1e-3
r1 = math.sqrt(-2.0 * math.log(eta1 * (2.0 * math.pi) ** 0.5))
line("gauss truncation radius d=1 eta=1e-3", r1)

# Truncated-Gaussian mass deficit, d=2: mass outside |u|>r is exp(-r^2/2)
line("trunc mass deficit d=2 eta=1e-3", math.exp(-r * r / 2.0), "(< 10*eta ?)")

# --- Bandwidth schedule -----------------------------------------------------
line("eps(N=1e4,d=2,C=1,a=.4)", 1e4 ** (-0.4))
line("eps(N=1e4,d=6,C=1,auto)", 1e4 ** (-2.0 / (4 + 6)))

# --- Brownian-bridge truth (Example functional) -----------------------------
for l in (2, 10, 1_000_000):
    line(f"bridge truth l={l}", (l + 1) / (l - 1) / 6.0)

# --- Standard normal density at 0 -------------------------------------------
line("N(0,1) density at 0", 1.0 / math.sqrt(2.0 * math.pi))

# --- Brownian bridge second moment at T/2 (set-conditioning oracle) ---------
# pinned coordinate: Var = t(T-t)/T at t=1/2, T=1 -> 0.25 ; free coordinate: t = 0.5
line("bridge var t=.5", 0.5 * 0.5 / 1.0)
line("free BM var t=.5", 0.5)

# --- hat grid by hand --------------------------------------------------------
t = [0.4, 0.6, 0.8, 1.0]
hat = [t[-1] - ti for ti in reversed(t[:-1])]
line("hat times for t=[.4,.6,.8,1.0]", hat)
