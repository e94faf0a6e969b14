import numpy as np
import pytest

from studyrules.event_log import Attempt, Status, StudyPath

# Fragment of an order-handling log: two orders, four activities each.
ORDER_LOG = """\
Order ID,Customer ID,Activity,Timestamp
1,1,op,2023-04-01T16:02:00
1,1,pp,2023-04-01T19:46:00
2,2,op,2023-04-01T20:13:00
1,1,pa,2023-04-02T08:07:00
2,2,pp,2023-04-02T08:35:00
2,2,pa,2023-04-02T09:21:00
1,1,sh,2023-04-02T10:05:00
2,2,sh,2023-04-02T10:05:00
"""
ORDER_SCHEMA = {"student_id": "Order ID", "course_id": "Activity", "time_start": "Timestamp"}

# The running-example student: course-1 failed in semester 1 and retaken in
# semester 3, nothing in semester 4.
EXAMPLE_LOG = """\
student-id,course-id,credit,time-start,time-end,semester,grade,final-status,gender,nationality,study-time
s1,course-1,8,2019-02-10,2019-03-01,1,5.0,FAILED,g1,country-1,2.5
s1,course-2,6,2019-02-20,2019-03-05,1,1.7,PASSED,g1,country-1,2.5
s1,course-3,6,2019-07-22,2019-08-10,2,2.3,PASSED,g1,country-1,2.5
s1,course-1,8,2020-02-11,2020-03-01,3,3.0,PASSED,g1,country-1,2.5
s1,course-4,5,2021-02-15,2021-03-02,5,1.3,PASSED,g1,country-1,2.5
s1,course-5,5,2021-02-18,2021-03-09,5,,PASSED,g1,country-1,2.5
"""


@pytest.fixture
def example_path() -> StudyPath:
    return StudyPath("s1", {
        1: (Attempt("course-1", 5.0, Status.FAILED), Attempt("course-2", 1.7)),
        2: (Attempt("course-3", 2.3),),
        3: (Attempt("course-1", 3.0),),
        5: (Attempt("course-4", 1.3), Attempt("course-5")),
    })


FIG_FEATURES = ("a-cs-course-115-2", "a-cs-course-82-1", "a-cs-course-81-2", "a-cs-course-15-2")
GOOD, BAD = "≤ 2.5", "> 2.5"

# Reference five-rule listing for the crafted dataset below, in leaf order.
REFERENCE_RULES = (
    "IF course-115-2 ≤ 0.5 THEN course-1-2 > 2.5",
    "IF course-115-2 > 0.5 AND course-82-1 ≤ 0.5 AND course-81-2 ≤ 0.5 THEN course-1-2 > 2.5",
    "IF course-115-2 > 0.5 AND course-82-1 ≤ 0.5 AND course-81-2 > 0.5 THEN course-1-2 ≤ 2.5",
    "IF course-115-2 > 0.5 AND course-82-1 > 0.5 AND course-15-2 ≤ 0.5 THEN course-1-2 ≤ 2.5",
    "IF course-115-2 > 0.5 AND course-82-1 > 0.5 AND course-15-2 > 0.5 THEN course-1-2 > 2.5",
)


def five_leaf_dataset():
    """72 rows whose depth-5 tree splits on 115-2, then 82-1, then 81-2 or 15-2."""
    groups = [((0, a, b, c), BAD, 5) for a in (0, 1) for b in (0, 1) for c in (0, 1)]
    groups += [((1, 0, 0, 0), BAD, 12), ((1, 0, 1, 0), GOOD, 4), ((1, 1, 0, 0), GOOD, 12), ((1, 1, 0, 1), BAD, 4)]
    rows, labels = [], []
    for row, label, k in groups:
        rows += [row] * k
        labels += [label] * k
    return np.array(rows), labels, list(FIG_FEATURES)
