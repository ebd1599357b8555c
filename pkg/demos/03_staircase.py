"""Split conformal: the deterministic interval and the randomized staircase.

Run: python3 demos/03_staircase.py
"""
import numpy as np

from fcsconf import CalibrationSet, randomized_staircase_set, set_size, split_conformal_interval
from fcsconf.split import staircase

# Three calibration residuals with importance weights, plus the test point's
# own weight. Weights are looked up by index in `table`.
scores = np.array([1.0, 2.0, 3.0])
table = np.array([0.15, 0.1, 0.45, 0.3])
calib = CalibrationSet(np.arange(3.0)[:, None], scores, model=lambda X: np.zeros(len(X)))
lr = lambda X: table[np.asarray(X)[:, 0].astype(int)]  # noqa: E731
x_test = np.array([3.0])
alpha = 0.6

print("split interval:", split_conformal_interval(calib, x_test, alpha, lr).intervals)

st = staircase(calib, x_test, alpha, lr)
for a, b, p in zip(st.edges[:-1], st.edges[1:], st.probabilities):
    print(f"  |y - mu| in [{a:g}, {b:g}]: included with probability {p:.3f}")

rng = np.random.default_rng(0)
for _ in range(4):
    s = randomized_staircase_set(calib, x_test, alpha, lr, rng)
    print("draw:", s.intervals, "size", set_size(s))
