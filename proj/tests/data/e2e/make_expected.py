# Builds expected_*_metrics.jsonl from hand-counted transitions of the
# fixture run. @CONFIG_HASH@ is substituted by the test.
import json
from fractions import Fraction

def frac(num, den):
    if den == 0:
        return {"num": num, "den": den, "value": "undefined"}
    q = Fraction(num, den) * 10**6
    scaled = (q.numerator * 2 + q.denominator) // (2 * q.denominator)
    return {"num": num, "den": den, "value": "%d.%06d" % divmod(scaled, 10**6)}

def row(task, domain, update, prior, new, future, excluded):
    names = ("correct", "incorrect", "unknown")
    d = lambda c: dict(zip(names, c))
    return {
        "acq_distortion": frac(new[1], sum(new)), "acq_loss": frac(new[2], sum(new)),
        "acquisition": frac(new[0], sum(new)), "config_hash": "@CONFIG_HASH@",
        "counts": {"future_from_unknown": d(future), "new_from_unknown": d(new),
                   "prior_from_correct": d(prior)},
        "denominators": {"acquisition": sum(new), "preservation": sum(prior), "projection": sum(future)},
        "domain": domain, "excluded": excluded, "model_tag": "fixture-model",
        "pres_distortion": frac(prior[1], sum(prior)), "pres_loss": frac(prior[2], sum(prior)),
        "preservation": frac(prior[0], sum(prior)),
        "proj_loss": frac(future[2], sum(future)), "proj_other": frac(future[1], sum(future)),
        "projection": frac(future[0], sum(future)),
        "schema_version": 1, "task": task, "update_tag": update,
    }

def excluded(future_pre_incorrect):
    keys = ["future_pre_correct", "future_pre_incorrect", "new_pre_correct", "new_pre_incorrect",
            "prior_pre_incorrect", "prior_pre_unknown"]
    e = dict.fromkeys(keys, 0)
    e["future_pre_incorrect"] = future_pre_incorrect
    return e

# (prior_from_correct, new_from_unknown, future_from_unknown, future_pre_incorrect) per task
runs = {
    "none": ("NONE", {"judgment": ([2, 0, 0], [0, 0, 2], [0, 0, 1], 1),
                      "generation": ([1, 0, 0], [0, 0, 1], [0, 0, 1], 0)}),
    "infer": ("INFER", {"judgment": ([1, 1, 0], [2, 0, 0], [1, 0, 0], 1),
                        "generation": ([0, 1, 0], [1, 0, 0], [0, 0, 1], 0)}),
}
for name, (update, tasks) in runs.items():
    with open("expected_%s_metrics.jsonl" % name, "w") as f:
        for task in ("judgment", "generation"):
            p, n, fu, fi = tasks[task]
            for domain in ("all", "Computer Science"):
                r = row(task, domain, update, p, n, fu, excluded(fi))
                f.write(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n")
