# ## A tour of the objective suite
#
# Every objective is a shifted classic test function on the box [-5, 5]^D:
# a seeded instance draws the optimum location x_opt uniformly from
# [-4, 4]^D and the optimum value f_opt from [-100, 100], then evaluates
# f(x) = f_opt + core(x - x_opt).  Instances are fully reproducible from
# (function id, dimension, seed).

import numpy as np

from divbatch import function_registry, make_function

print("the ten functions, by structural group:")
for fid, group, label in function_registry():
    print(f"  {fid:14s} {group:28s} {label}")

# ## Building an instance
#
# The same (id, dimension, seed) triple always gives the same instance,
# while different seeds move the optimum around.

fn = make_function("rastrigin_sep", dimension=5, seed=3)
print("\nrastrigin_sep, D=5, seed 3:")
print("  x_opt =", np.round(fn.x_opt, 4))
print("  f_opt =", round(fn.f_opt, 4))
print("  f(x_opt) =", round(fn.evaluate(fn.x_opt), 4), "(exactly f_opt)")

other = make_function("rastrigin_sep", dimension=5, seed=4)
print("  seed 4 optimum instead sits at", np.round(other.x_opt, 4))

# ## Losses and evaluation counting
#
# loss(f) = f - f_opt turns raw values into regret, and the instance
# counts every evaluation so budget accounting needs no extra bookkeeping.

rng = np.random.default_rng(0)
xs = rng.uniform(-5, 5, size=(1000, 5))
fs = fn.evaluate_many(xs)
print("\n1000 uniform samples on that instance:")
print("  best sampled loss :", round(fn.loss(fs.min()), 3))
print("  mean sampled loss :", round(fn.loss(fs.mean()), 3))
print("  evaluations so far:", fn.eval_count)

# losses are nonnegative by construction, zero only at the optimum
assert fn.loss(fs.min()) > 0.0
assert fn.loss(fn.evaluate(fn.x_opt)) == 0.0

# ## Conditioning differences across the suite
#
# A quick look at how wildly the raw scales differ, which is why the
# benchmark harness reports per-function normalized losses.

print("\nloss of the same unit offset x_opt + e_1 on each function (D=5, seed 0):")
for fid, _, _ in function_registry():
    g = make_function(fid, 5, 0)
    step = g.x_opt.copy()
    step[0] += 1.0
    print(f"  {fid:14s} {g.loss(g.evaluate(step)):12.4g}")
