//! Plain matplotlib scripts shipped next to the figure data.

use super::Target;

const PRELUDE: &str = "import csv\nimport sys\nfrom pathlib import Path\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\nHERE = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent\n\n\ndef read(name):\n    with open(HERE / name) as f:\n        rows = list(csv.DictReader(f))\n    return {k: [float(r[k]) if r[k] not in (\"\", \"true\", \"false\") else r[k] for r in rows] for k in rows[0]}\n\n\n";

const FIG1: &str = r#"fig, ax = plt.subplots()
for name, label in [("fig1_cf.csv", "Fokker-Planck"), ("fig1_adler_histogram.csv", "Adler"),
                    ("fig1_langevin_histogram.csv", "Langevin"), ("fig1_lindblad.csv", "Lindblad")]:
    d = read(name)
    ax.plot(d["theta"], d["density"], label=label)
ax.set_xlabel("theta_-")
ax.set_ylabel("P(theta_-)")
ax.legend()
fig.savefig(HERE / "fig1.png", dpi=150)
"#;

const FIG2: &str = r#"fig, (a, b) = plt.subplots(2, 1, sharex=True)
d = read("fig2_trajectories.csv")
for k in d:
    if k != "t":
        a.plot(d["t"], d[k], lw=0.8)
a.set_ylabel("theta_-")
v = read("fig2_variance.csv")
b.plot(v["t"], v["theta_minus_var"])
b.set_xlabel("t")
b.set_ylabel("Var theta_-")
fig.savefig(HERE / "fig2.png", dpi=150)
"#;

const FIG3: &str = r#"fig, ax = plt.subplots()
d = read("fig3_scan.csv")
for n in sorted(set(d["photons"])):
    idx = [i for i, m in enumerate(d["photons"]) if m == n]
    ax.plot([d["Delta_over_D"][i] for i in idx], [d["ratio"][i] for i in idx], label=f"n={n:g}")
mc = read("fig3_mc.csv")
ax.errorbar(mc["Delta_over_D"], [s / z for s, z in zip(mc["sigma_minus_sq"], mc["sigma0_sq"])], fmt="o", ms=3)
ax.set_xlabel("Delta/D")
ax.set_ylabel("sigma_-^2 / sigma_0^2")
ax.legend()
ins = ax.inset_axes([0.55, 0.15, 0.4, 0.35])
i = read("fig3_inset.csv")
for n in sorted(set(i["photons"])):
    idx = [k for k, m in enumerate(i["photons"]) if m == n]
    ins.semilogy([i["D_over_gamma1"][k] for k in idx], [max(i["sigma_minus_sq"][k], 1e-300) for k in idx])
fig.savefig(HERE / "fig3.png", dpi=150)
"#;

const FIG4: &str = r#"fig, ax = plt.subplots()
d = read("fig4_self_energy.csv")
ax.plot(d["omega"], d["Im_PiR_11"], label="Im Pi^R_11")
ax.plot(d["omega"], d["Re_PiR_11"], label="Re Pi^R_11")
ax.plot(d["omega"], d["Im_PiK_11"], label="Im Pi^K_11")
nu = read("fig4_nu.csv")
for w1, w2, s, v in zip(nu["omega1"], nu["omega2"], nu["synchronized"], nu["nu"]):
    if s == "true" and abs(w1 - w2) < 1e-9:
        ax.axvline(v, color="k", lw=0.5)
ax.set_xlabel("omega / omega_ex")
ax.legend()
fig.savefig(HERE / "fig4.png", dpi=150)
"#;

const FIG5: &str = r#"fig, ax = plt.subplots()
d = read("fig5_ratios.csv")
for w2 in sorted(set(d["omega2"])):
    idx = [i for i, m in enumerate(d["omega2"]) if m == w2 and d["synchronized"][i] == "true"]
    ax.plot([d["omega1"][i] for i in idx], [d["ratio"][i] for i in idx], "o-", ms=3, label=f"omega2={w2:g}")
ax.set_yscale("log")
ax.set_xlabel("omega1 / omega_ex")
ax.set_ylabel("sigma_-^2 / sigma_+^2")
ax.legend()
fig.savefig(HERE / "fig5.png", dpi=150)
"#;

const S1: &str = r#"fig, (a, b) = plt.subplots(2, 1)
t = read("s1_trajectory.csv")
a.plot(t["t"], t["re_phi1"], lw=0.6, label="Re phi1")
a.plot(t["t"], t["re_phi2"], lw=0.6, label="Re phi2")
a.legend()
c = read("s1_autocorrelation.csv")
for k in ["11", "12", "22"]:
    b.plot(c["tau"], [abs(complex(x, y)) for x, y in zip(c["re_c" + k], c["im_c" + k])], label="|C_" + k + "|")
b.set_xlabel("tau")
b.legend()
fig.savefig(HERE / "s1.png", dpi=150)
"#;

const S2: &str = r#"d = read("s2_diffusion.csv")
fig, axes = plt.subplots(1, 2, figsize=(9, 4))
axes[0].errorbar(d["photons"], d["langevin"], fmt="o", label="Langevin")
axes[0].plot(d["photons"], d["adler"], "s", label="Adler")
axes[0].plot(d["photons"], d["quadrature"], "-", label="quadrature")
axes[0].set_xscale("log")
axes[0].set_yscale("log")
axes[0].set_xlabel("n")
axes[0].set_ylabel("sigma_-^2")
axes[0].legend()
for n in d["photons"]:
    p = read(f"s2_phase_n{n:g}.csv")
    axes[1].plot(p["theta"], p["continued_fraction"], label=f"n={n:g}")
    if p["lindblad"][0] != "":
        axes[1].plot(p["theta"], p["lindblad"], "--")
axes[1].legend()
fig.savefig(HERE / "s2.png", dpi=150)
"#;

/// File name and contents of the plot script for `target`.
pub(super) fn script(target: Target) -> (&'static str, String) {
    let (name, body) = match target {
        Target::Fig1 => ("fig1_plot.py", FIG1),
        Target::Fig2 => ("fig2_plot.py", FIG2),
        Target::Fig3 => ("fig3_plot.py", FIG3),
        Target::Fig4 => ("fig4_plot.py", FIG4),
        Target::Fig5 => ("fig5_plot.py", FIG5),
        Target::S1 => ("s1_plot.py", S1),
        Target::S2 => ("s2_plot.py", S2),
    };
    (name, format!("{PRELUDE}{body}"))
}
