"""Alignment scoring and LCS basics on the worked examples.

Run:  python3 demos/01_alignment_and_lcs.py
"""

from lcslab import (
    SubstitutionMatrix,
    TriSequence,
    align_score,
    lcs_bitparallel,
    lcs_length,
    minimal_matching,
    render_alignment,
    strip_a,
)

matrix = SubstitutionMatrix(
    {("0", "0"): 2, ("0", "1"): 1, ("1", "0"): 1, ("1", "1"): 3}, gap=0
)
print("score matrix s(0,0)=2, s(0,1)=s(1,0)=1, s(1,1)=3, gap penalty 0")
print("align(0101, 1100) =", align_score("0101", "1100", matrix))

x = TriSequence.from_text("a11a1000")
x01, na = strip_a(x)
print(f"\nX = {x.to_text()}  ->  X01 = {x01.to_text()}, number of a's = {na}")
print("the a's can never match a binary sequence, so")
print("lcs(X, 00110011) =", lcs_length(x, "00110011"),
      "= lcs(X01, 00110011) =", lcs_length(x01, "00110011"))

mt = minimal_matching(x01.to_text(), "00110011")
top, bottom = render_alignment(mt, x01.to_text(), "00110011")
print("\none optimal alignment:")
print(" ", top)
print(" ", bottom)

print("\nthe bit-parallel fast path agrees:",
      lcs_bitparallel(x01.to_text(), "00110011"))
