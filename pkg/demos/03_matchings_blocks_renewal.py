"""Minimal matchings, free bits, blocks of Y, and the renewal embedding.

Run:  python3 demos/03_matchings_blocks_renewal.py
"""

from fractions import Fraction

from lcslab import (
    Matching,
    blocks,
    check_single_color,
    classify_matches,
    containment_prob_exact,
    count_ND,
    free_bit_total,
    minimal_matching,
    nonempty_match_count,
    render_alignment,
    renewal_embed,
)

z, y = "101011", "111000111"
given = Matching((1, 3, 4, 5, 6), (1, 2, 4, 7, 8))
print("a maximal matching of", z, "and", y)
top, bottom = render_alignment(given, z, y)
print(" ", top)
print(" ", bottom)
records = classify_matches(given, z, y)
for i, r in enumerate(records, 1):
    kind = "empty" if r.is_empty else f"{r.free_bits} free bit(s)"
    print(f"  match {i}: pi {r.pi_lo}->{r.pi_hi}, eta {r.eta_lo}->{r.eta_hi}: {kind}")
eta_m, m = given.eta[-1], given.m
print("free-bit proportion:", Fraction(eta_m - m, eta_m))

mt = minimal_matching(z, y)
print("\ncanonical minimal matching: pi =", mt.pi, " eta =", mt.eta)
recs = classify_matches(mt, z, y)
print("nonempty matches:", nonempty_match_count(recs),
      "| single-color:", check_single_color(recs),
      "| free bits:", free_bit_total(recs))

print("\nblocks of", y, ":", [(b.start, b.end, b.color) for b in blocks(y)])
print("N_3, Ntilde_3 =", count_ND(y, 3))

print("\nrenewal embedding of 001 into 10101000111:", renewal_embed("001", "10101000111"))
print("exact P(3-bit string embeds in a 6-bit one):", containment_prob_exact(3, 6))
