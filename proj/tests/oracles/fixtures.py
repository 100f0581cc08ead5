# Independent numpy oracles used to freeze golden values in the C++ tests.
import numpy as np, math

def alpha_schedule(delta, theta):
    a = [1.0]
    while a[-1] >= delta / theta**2:
        a.append(0.5 * a[-1] * (1 - math.sqrt(delta / a[-1])))
    return a, len(a) - 2

a, s = alpha_schedule(0.04, 0.5)
print("schedule(0.04,0.5): alphas", [repr(x) for x in a], "s", s)
a, s = alpha_schedule(0.24999, 0.5)
print("schedule(0.24999,0.5): alphas", [repr(x) for x in a], "s", s)
print("envelope M=1024 k=4 lower", repr(1024 - 2**2 * 32 / (math.sqrt(2) - 1)))

# brute-force sweep for {1, sqrt2 cos} on M=8, I={0,1,2,3}, p=1, resolution 1e5
M = 8
x = 2 * math.pi * np.arange(M) / M
Phi = np.stack([np.ones(M), math.sqrt(2) * np.cos(x)], axis=1)
def sweep(Phi, I, p, res):
    t = math.pi * np.arange(res) / res
    C = np.stack([np.cos(t), np.sin(t)])
    F = Phi @ C
    num = np.mean(np.abs(F[I]) ** p, axis=0)
    den = np.mean(np.abs(F) ** p, axis=0)
    r = num / den
    return r.min(), r.max()
lo, hi = sweep(Phi, [0, 1, 2, 3], 1.0, 100000)
print("bruteforce M8 I0123 p1:", repr(lo), repr(hi))
lo, hi = sweep(Phi, [0, 1, 2, 3], 1.5, 100000)
print("bruteforce M8 I0123 p1.5:", repr(lo), repr(hi))
lo, hi = sweep(Phi, [0, 2, 4, 6], 1.0, 100000)
print("bruteforce M8 even p1:", repr(lo), repr(hi))

# exact enumeration of sign sums for a=(1/2,...)
import itertools
a = np.full(4, 0.5)
cnt = sum(1 for e in itertools.product([-1, 1], repeat=4) if abs(np.dot(a, e)) <= 1)
print("signsum 4 halves", cnt, "/16")

# predict window delta=0.04, theta=0.5, M=4096
c1 = math.sqrt(2) / (math.sqrt(2) - 1); c3 = 3 * c1
a, s = alpha_schedule(0.04, 0.5)
print("window", repr(a[s+1] * 0.5 * 4096), repr(math.exp(c3 * 0.5) * a[s+1] * 4096))

# theoretical budgets n=100,K=1,eps=0.1
n, eps = 100, 0.1
mt1 = eps**-2 * n * math.log(n)
mt2 = eps**-2 * n * (math.log(n) + math.log(1/eps)) * (math.log(1/eps) + math.log(math.log(n)))**2
print("budgets", mt1, mt2)

# sigma_2 for J = all of M=8, I = even indices, {1, sqrt2 cos}: pencil (Phi_I^T Phi_I, Phi^T Phi)
import scipy.linalg as sl
A = Phi[[0, 2, 4, 6]].T @ Phi[[0, 2, 4, 6]]
B = Phi.T @ Phi
w = sl.eigh(A, B, eigvals_only=True)
print("sigma2 even split", repr(max(abs(2 * w.max() - 1), abs(2 * w.min() - 1))))
# same by a one-angle sweep of 2 sum_I f^2 / sum_J f^2 - 1
t = math.pi * np.arange(200000) / 200000
F = Phi @ np.stack([np.cos(t), np.sin(t)])
r = 2 * np.sum(F[[0, 2, 4, 6]] ** 2, axis=0) / np.sum(F ** 2, axis=0) - 1
print("sigma2 even split sweep", repr(np.abs(r).max()))

# kappa2 at eps=0.25, kappa1=0.5, c3 = 3 c1: largest root of the binding inequality
from scipy.optimize import brentq
eps, k1 = 0.25, 0.5
lower = lambda k2: (1 - k1 * eps) * math.exp(-c3 * k2 * eps) - (1 - eps)
upper = lambda k2: (1 + eps) - (1 + k1 * eps) * math.exp(c3 * k2 * eps) / (1 - k2 * eps)
print("kappa2 eps=0.25", repr(min(brentq(lower, 1e-9, 0.99), brentq(upper, 1e-9, 0.5))))

# companion sequences delta=0.04 theta=0.5 kappa=0.9
a, s = alpha_schedule(0.04, 0.5)
aa, bb = [1.0], [1.0]
for j in range(s + 1):
    x = 0.9 * math.sqrt(0.04 / a[j])
    aa.append(0.5 * aa[-1] * (1 - x)); bb.append(0.5 * bb[-1] * (1 + x))
print("companion", repr(aa[-1]), repr(bb[-1]), "bound", repr(math.exp(c3 * 0.9 * 0.5)))

# halving targets, K=1 n=17 alpha=0.5 M=12579 |J|=6000
K, n, al, MM = 1.0, 17, 0.5, 12579.0
print("sigma1", repr(math.sqrt(K * n * math.log(n) / (al * MM))))
print("sigma2", repr(math.sqrt(K * n * math.log(6000) / (al * MM)) * math.log(2 + MM / (K * n))))
A = Phi[[0, 1, 2, 3]].T @ Phi[[0, 1, 2, 3]]
w = sl.eigh(A, B, eigvals_only=True)
print("sigma2 first-half split", repr(max(abs(2 * w.max() - 1), abs(2 * w.min() - 1))))
