"""Reference values for the statistics unit tests (scipy / numpy)."""
import numpy as np
from scipy import stats

# Normal-approximation Wilcoxon with ties and continuity correction (n > 25).
# Integer data so tie groups do not depend on floating-point rounding.
x = [float((i * 7) % 13) for i in range(30)]
y = [float((i * 5) % 11) for i in range(30)]
r = stats.wilcoxon(x, y, zero_method="wilcox", correction=True, method="approx")
print("wilcoxon_approx_p", repr(r.pvalue))
d = np.array(x) - np.array(y)
print("wilcoxon_approx_nonzero", int(np.sum(d != 0)))

# Exact Wilcoxon, small n, no ties.
a = [1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30]
b = [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14, 1.29]
print("wilcoxon_exact_p", repr(stats.wilcoxon(a, b, method="exact").pvalue))

px = [1.0, 2.0, 3.5, 4.0, 7.25, 8.0]
py = [2.1, 3.9, 6.2, 8.4, 13.0, 16.5]
print("pearson", repr(stats.pearsonr(px, py)[0]))

q = [3.0, 7.0, 8.0, 5.0, 12.0, 14.0, 21.0, 13.0, 18.0]
print("q1", repr(np.percentile(q, 25)), "q3", repr(np.percentile(q, 75)))
