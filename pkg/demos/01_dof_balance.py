"""When is rigid structure recoverable from orthographic frames?

A body of p traced points observed over k frames carries
-1 + 3p + 5(k-1) unknowns (pairwise geometry up to the gauge freedoms)
against 2kp measured image coordinates.  Recovery is possible only when
the measurements at least match the unknowns.  This script prints the
balance for small p, k and highlights the two minimal cases:
3 points / 3 frames and 4 points / 3 frames (4 points / 2 frames balances
numerically but is defeated by the two-frame ambiguity -- see demo 05).
"""

from orthosfm import dof_balance

print(f"{'points':>7} {'frames':>7} {'unknowns':>9} {'measurements':>13}  verdict")
for p in range(3, 7):
    for k in range(2, 6):
        bal = dof_balance(p, k)
        verdict = "recoverable" if bal.recoverable else "under-determined"
        marker = "  <-- minimal" if (p, k) in ((3, 3), (4, 3)) else ""
        print(f"{p:>7} {k:>7} {bal.unknowns:>9} {bal.information:>13}  "
              f"{verdict}{marker}")

print()
print("Note: (4, 2) balances 16 = 16, yet two frames never determine")
print("structure -- a one-parameter family of bodies explains both images.")
print("Run demo 05 to construct that family explicitly.")
