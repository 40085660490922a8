"""Regenerate the bundled STO-3G FCIDUMP files.

Integrals come from an RHF calculation in PySCF; the FCI, CISD and HF
totals it reports are stored in pyscf_reference.json so the Rust oracle
can be cross-checked against an independent solver.

    python3 generate_fcidump.py
"""
import json
import math

from pyscf import ci, fci, gto, scf
from pyscf.tools import fcidump


def water(r=0.9572, angle=104.52):
    t = math.radians(angle / 2)
    y, z = r * math.sin(t), r * math.cos(t)
    return f"O 0 0 0; H 0 {y} {z}; H 0 {-y} {z}"


SYSTEMS = {
    "h2": ("H 0 0 0; H 0 0 0.7414", 0.7414),
    "lih": ("Li 0 0 0; H 0 0 1.5949", 1.5949),
    "beh2": ("Be 0 0 0; H 0 0 1.3264; H 0 0 -1.3264", 1.3264),
    "h2o": (water(), 0.9572),
}
for r in (0.5, 0.7414, 1.0, 1.3, 1.6, 1.8535):
    SYSTEMS[f"h2_{r:.4f}"] = (f"H 0 0 0; H 0 0 {r}", r)


def main():
    reference = {}
    for name, (atom, bond) in SYSTEMS.items():
        mol = gto.M(atom=atom, basis="sto-3g", verbose=0)
        mf = scf.RHF(mol).run()
        e_fci = fci.FCI(mf).kernel()[0]
        e_cisd = ci.CISD(mf).run().e_tot
        fcidump.from_scf(mf, f"{name}.fcidump", tol=1e-15)
        reference[name] = {
            "file": f"{name}.fcidump",
            "bond_length_angstrom": bond,
            "e_hf": mf.e_tot,
            "e_fci": e_fci,
            "e_cisd": e_cisd,
        }
        print(f"{name:12s} HF {mf.e_tot:.8f}  CISD {e_cisd:.8f}  FCI {e_fci:.8f}")
    with open("pyscf_reference.json", "w") as f:
        json.dump(reference, f, indent=2)


if __name__ == "__main__":
    main()
