#!/usr/bin/env python3
"""Generate the stand-in dispersion tables shipped under filmstack/data/materials.

The shipped n/k tables are STAND-INS: smooth, physically plausible curves from
standard textbook dispersion models (Sellmeier / Cauchy fits for dielectrics,
Drude / Lorentz oscillator models for metals and semiconductors). They are NOT
measured data for any specific deposition process; replace the CSVs with your
own measurements for quantitative work. Sellmeier coefficients for SiO2, Al2O3,
MgF2, TiO2, Si3N4 and ZnSe follow widely published fits (Malitson 1965/1962,
Dodge 1984, DeVore 1951, Luke 2015, Marple 1964); the remaining entries are
plausibility fits chosen to land near handbook values over 400-1100 nm.

Usage:  python tools/build_dispersion_tables.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

HC_EV_NM = 1239.841984  # photon energy (eV) = HC_EV_NM / wavelength (nm)

WL_NM = np.arange(380.0, 1120.0 + 1e-9, 5.0)


def sellmeier(wl_um, terms):
    n2 = np.ones_like(wl_um)
    for b, c in terms:
        n2 = n2 + b * wl_um**2 / (wl_um**2 - c)
    return np.sqrt(n2)


def cauchy(wl_um, a, b, c=0.0):
    return a + b / wl_um**2 + c / wl_um**4


def nk_from_epsilon(eps):
    m = np.sqrt(eps)
    return np.real(m), np.maximum(np.imag(m), 0.0)


def drude(wl_nm, eps_inf, wp_ev, gamma_ev):
    w = HC_EV_NM / wl_nm
    eps = eps_inf - wp_ev**2 / (w**2 + 1j * gamma_ev * w)
    return nk_from_epsilon(eps)


def lorentz(wl_nm, eps_inf, f, w0_ev, gamma_ev):
    w = HC_EV_NM / wl_nm
    eps = eps_inf + f * w0_ev**2 / (w0_ev**2 - w**2 - 1j * gamma_ev * w)
    return nk_from_epsilon(eps)


def lossless(n_fn):
    def model(wl_nm):
        return n_fn(wl_nm / 1000.0), np.zeros_like(wl_nm)
    return model


MODELS = {
    # dielectrics (k = 0 over this range)
    "SiO2": lossless(lambda u: sellmeier(u, [(0.6961663, 0.0684043**2),
                                             (0.4079426, 0.1162414**2),
                                             (0.8974794, 9.896161**2)])),
    "Al2O3": lossless(lambda u: sellmeier(u, [(1.4313493, 0.0726631**2),
                                              (0.65054713, 0.1193242**2),
                                              (5.3414021, 18.028251**2)])),
    "MgF2": lossless(lambda u: sellmeier(u, [(0.48755108, 0.04338408**2),
                                             (0.39875031, 0.09461442**2),
                                             (2.3120353, 23.793604**2)])),
    "MgO": lossless(lambda u: sellmeier(u, [(1.9476, 0.0774**2)])),
    "TiO2": lossless(lambda u: np.sqrt(5.913 + 0.2441 / (u**2 - 0.0803))),
    "Ta2O5": lossless(lambda u: cauchy(u, 2.04, 0.02)),
    "HfO2": lossless(lambda u: cauchy(u, 1.88, 0.01)),
    "Si3N4": lossless(lambda u: sellmeier(u, [(3.0249, 0.1353406**2),
                                              (40314.0, 1239.842**2)])),
    "AlN": lossless(lambda u: sellmeier(u, [(3.263, 0.1715**2)])),
    "ZnO": lossless(lambda u: sellmeier(u, [(2.81418, 0.1972**2)])),
    "ZnS": lossless(lambda u: sellmeier(u, [(3.76, 0.2454**2)])),
    "ZnSe": lossless(lambda u: np.sqrt(4.0 + 1.90 * u**2 / (u**2 - 0.0784))),
    # semiconductors (single-oscillator fits; absorbing toward the blue)
    "Si": lambda wl: lorentz(wl, 3.0, 7.0, 3.7, 0.5),
    "Ge": lambda wl: lorentz(wl, 8.0, 8.0, 2.6, 0.8),
    # metals / conductive films
    "Al": lambda wl: drude(wl, 1.0, 15.0, 0.6),
    "ITO": lambda wl: drude(wl, 4.0, 1.75, 0.15),
    "TiN": lambda wl: drude(wl, 3.0, 7.0, 1.0),
}

SUBSTRATE_NAME = "glass"
SUBSTRATE_INDEX = 1.52  # constant lossless crown glass


def write_csv(path, wl, n, k):
    lines = ["wavelength_nm,n,k"]
    for w, nn, kk in zip(wl, n, k):
        lines.append(f"{w:.1f},{float(nn)!r},{float(kk)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = sorted(MODELS)
    for name in names:
        n, k = MODELS[name](WL_NM)
        if np.any(~np.isfinite(n)) or np.any(n <= 0) or np.any(k < 0):
            raise SystemExit(f"{name}: model produced invalid n/k")
        write_csv(out / f"{name}.csv", WL_NM, n, k)
    write_csv(out / f"{SUBSTRATE_NAME}.csv", WL_NM,
              np.full_like(WL_NM, SUBSTRATE_INDEX), np.zeros_like(WL_NM))
    manifest = ["# Stand-in dispersion tables; see tools/build_dispersion_tables.py",
                f"substrate = \"{SUBSTRATE_NAME}.csv\"",
                "materials = ["]
    manifest += [f"    \"{name}\"," for name in names]
    manifest += ["]", ""]
    (out / "materials.toml").write_text("\n".join(manifest), encoding="utf-8")
    print(f"wrote {len(names)} material tables + substrate to {out}")


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else \
        Path(__file__).resolve().parents[1] / "src" / "filmstack" / "data" / "materials"
    main(target)
