"""How many messages, and how much error? The analytic comparison table.

Every row is computed from closed-form planners and bounds, so this runs in
about a second.  Infeasible settings (blanket rate >= 1) print as ``inf``.
"""

from shufflesum.tables import default_scenarios, emit_bounds_table

if __name__ == "__main__":
    print(emit_bounds_table(default_scenarios(), "md"))
    print("Same rows with formula provenance: shufflesum bounds --format json")
