"""The Bieri-Stallings kernels, looked at from four sides.

K_n is the kernel of (F_2)^n -> Z sending every generator to 1.  The
script computes its finiteness length from characters, checks the virtual
surjection data that controls it, builds a commutator witness and feeds the
result to the flag engine.

Run: python3 demos/bieri_stallings.py
"""

from subdirect import (
    INFINITE,
    Character,
    KernelSpec,
    KnowledgeBase,
    abelian_kernel,
    commutator_witness,
    finiteness_length,
    sigma_member,
    virtually_surjects,
)


def main() -> None:
    print("finiteness length of K_n")
    for n in range(2, 7):
        spec = KernelSpec([2] * n, [[1] * (2 * n)])
        print(f"  n={n}: {finiteness_length(spec)}")

    # live on all three factors: Sigma^2 but not Sigma^3
    chi = Character([2, 2, 2], [[1, 1], [1, 1], [1, 1]])
    print("all-ones character on (F_2)^3:", [str(sigma_member(chi, k)) for k in range(1, 5)])

    P = abelian_kernel([2, 2, 2], [[1] * 6], label="K_3")
    for k in (1, 2, 3):
        print(f"K_3 virtually surjects to {k}-tuples: {virtually_surjects(P, k).verdict}")

    # pairs suffice for the witness: [a, b] lies in the first-factor kernel
    F = P.ambient.factors[0]
    report = commutator_witness(P, 2, [F.parse("a"), F.parse("b")])
    print("\n".join(report.lines()))

    kb = KnowledgeBase()
    for f in ("F1", "F2", "F3"):
        kb.assert_flag(f, "F", INFINITE, True)
    kb.add_product("K_3", ["F1", "F2", "F3"])
    kb.assert_vs("K_3", 2, True)
    kb.derive()
    for kind, k in (("wFP", 2), ("wFP", 3)):
        value, prov = kb.query("K_3", kind, k)
        print(f"K_3 {kind}_{k}: {value} ({prov or '-'})")


if __name__ == "__main__":
    main()
