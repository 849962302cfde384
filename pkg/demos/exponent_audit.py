"""Exact exponent bookkeeping for the twisted fourth moment.

Prints the exponent table at several values of theta and the discrepancy
report at the Kim-Sarnak value.

Run: python demos/exponent_audit.py
"""

from fourthmoment import exponents

for entry in exponents.selberg_table():
    print(f"{entry.year} {entry.authors:<20} lambda1 >= {str(entry.lambda1):<10} theta = {entry.theta}")
print()

columns = [exponents.SELBERG_CONJECTURE, exponents.KIM_SARNAK, exponents.parse_theta_spec("3/16")]
tables = [dict(exponents.exponent_table(t)) for t in columns]
print(f"{'name':<26}" + "".join(f"{str(t.value):>12}" for t in columns))
for name in tables[0]:
    print(f"{name:<26}" + "".join(f"{str(tab[name]):>12}" for tab in tables))
print()

for d in exponents.discrepancy_report(exponents.KIM_SARNAK):
    flag = "ok " if d.matches else "MISMATCH"
    print(f"{flag:<9}{d.name:<30} stated {str(d.stated):<10} derived {str(d.derived):<10} {d.note}")
