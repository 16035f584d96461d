"""Fibre products over finite quotients: index, generators, first homology
and the abelian normal form.

Run: python3 demos/fibre_products.py
"""

from pathlib import Path

from subdirect import fibre_product, h1, rs_presentation, stallings_bieri_form
from subdirect.formats import load_map
from subdirect.generators import fibre_generators
from subdirect.homology import format_invariants

DATA = Path(__file__).resolve().parent / "data"


def show(title: str, q1, q2) -> None:
    P = fibre_product(q1, q2)
    pres = rs_presentation(P)
    print(f"== {title}")
    print(f"index: {P.index()}")
    print(f"presentation: {pres.ngens} generators, {len(pres.relators)} relators")
    print(f"H_1: {format_invariants(*h1(pres))}")
    gens = fibre_generators(q1, q2)
    print(f"generating tuples: {len(gens.tuples)} ({gens.status})")
    form = stallings_bieri_form(P, 2)
    print(f"normal form: {form.description}")


def main() -> None:
    show("Z x Z over Z/2", load_map(DATA / "z_mod2_x.map"), load_map(DATA / "z_mod2_y.map"))
    # S_3 is not abelian: the normal form passes to the preimages of A_3
    s3 = load_map(DATA / "f2_to_s3.map")
    show("F_2 x F_2 over S_3", s3, load_map(DATA / "f2_to_s3.map"))


if __name__ == "__main__":
    main()
