"""Where does the cusp map stop having finite conformal energy?

For each alpha the forward map h is integrated shell by shell toward the
cusp tip, the closed-form envelope is compared with quadrature, and the
inverse is sampled for a Lipschitz bound.
"""
from bienergy import cusp_threshold

report = cusp_threshold(alphas=(1.0, 2.0, 2.5, 3.0, 3.5, 4.0), n=3)

print(f"{'cell':<22}{'predicted':<12}{'computed':<12}agree  borderline")
for row in report.rows:
    print(f"{row.cell:<22}{row.predicted:<12}{row.computed:<12}{str(row.agree):<7}{row.borderline}")
print(report.summary)
