//! Matplotlib scripts written next to the CSV they read. Run from the output directory.

pub const EQUILIBRIUM: &str = r#"import csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("density.csv")))
x = [float(r["x"]) for r in rows]
plt.plot(x, [float(r["rho"]) for r in rows], label="solver")
try:
    ref = list(csv.DictReader(open("closed_form.csv")))
    plt.plot([float(r["x"]) for r in ref], [float(r["rho_closed_form"]) for r in ref], "--", label="closed form")
except FileNotFoundError:
    pass
plt.xlabel("x")
plt.ylabel("density")
plt.legend()
plt.savefig("equilibrium.png", dpi=150)
"#;

pub const CLT: &str = r#"import csv
import glob
import math
import matplotlib.pyplot as plt

for path in sorted(glob.glob("fluctuation_N*.csv")):
    v = [float(r["fluctuation"]) for r in csv.DictReader(open(path))]
    plt.hist(v, bins=60, density=True, histtype="step", label=path[12:-4])
s2 = [float(r["target_sigma2"]) for r in csv.DictReader(open("clt.csv"))][0]
xs = [-4 * math.sqrt(s2) + 8 * math.sqrt(s2) * k / 400 for k in range(401)]
plt.plot(xs, [math.exp(-x * x / (2 * s2)) / math.sqrt(2 * math.pi * s2) for x in xs], "k--", label="limit")
plt.xlabel("sqrt(N) fluct_N(f)")
plt.legend()
plt.savefig("clt.png", dpi=150)
"#;

pub const EDGE: &str = r#"import csv
import glob
import math
import matplotlib.pyplot as plt

for path in sorted(glob.glob("edge_rescaled_N*.csv")):
    v = sorted(float(r["rescaled_max"]) for r in csv.DictReader(open(path)))
    plt.plot(v, [(k + 0.5) / len(v) for k in range(len(v))], label=path[14:-4])
ts = [-3 + 10 * k / 400 for k in range(401)]
plt.plot(ts, [math.exp(-math.exp(-t)) for t in ts], "k--", label="Gumbel")
plt.xlabel("alpha (max - E)")
plt.ylabel("CDF")
plt.legend()
plt.savefig("edge.png", dpi=150)
"#;

pub const CONCENTRATION: &str = r#"import csv
import math
import matplotlib.pyplot as plt

rows = [r for r in csv.DictReader(open("concentration.csv")) if int(r["exceedances"]) > 0]
for n in sorted({r["n_particles"] for r in rows}, key=int):
    sel = [r for r in rows if r["n_particles"] == n]
    plt.plot([int(n) * float(r["radius"]) ** 2 for r in sel], [math.log(float(r["frequency"])) for r in sel], "o-", label="N=" + n)
plt.xlabel("N r^2")
plt.ylabel("log exceedance frequency")
plt.legend()
plt.savefig("concentration.png", dpi=150)
"#;
