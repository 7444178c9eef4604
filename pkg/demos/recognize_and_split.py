"""
Recognizing shuffle squares
===========================

A word is a shuffle square when its letters split into two identical
subwords.  The buffer-set recursion decides this exactly and hands back a
witness split.
"""
from shufflesq import evolve, extract_partition, lt, recognize
from shufflesq.words import Word, render, unpack

s = "100011100"
for t, B in enumerate(evolve(s)):
    print(t, sorted(render(Word(unpack(k))) for k in B.elements))

# 0011 splits as positions {1,3} and {2,4}
p = extract_partition("0011")
print(p.A1, p.A2, p.check("0011"))

# 0110 does not split, but has twins of length 1
print(recognize("0110"), lt("0110"))
