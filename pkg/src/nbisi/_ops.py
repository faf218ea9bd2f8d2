"""Index layout of the per-frame operation-count array shared by all kernels.

counts[component, category]; component 0 = detector, 1 = decoder.
"""

DETECTOR = 0
DECODER = 1

INT_ADD = 0
INT_CMP = 1
FIELD_OP = 2
REAL_MUL = 3
REAL_ADD = 4
REAL_DIV = 5
# check-node configurations visited by EMS merges (not one of the six cost categories)
CONFIGS = 6

CATEGORIES = ("int_add", "int_cmp", "field_ops", "real_mul", "real_add", "real_div")
N_SLOTS = 7
