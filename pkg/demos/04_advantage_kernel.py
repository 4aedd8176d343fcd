"""Walk one training step's worth of rollouts through the reward kernel.

Shows the quality reward, the percentile length band, attenuation of an
overlong response, and the final group-relative advantages.
"""

import random

from reasonkit import (
    KernelConfig,
    Rollout,
    compute_advantages,
    estimate_bounds,
    group_rollouts,
    length_attenuation,
    reasoning_quality_reward,
)

rng = random.Random(42)

# history of validated rollouts to calibrate the per-bucket length band
history = [Rollout(prompt_id=f"h{i}", bucket="depth4",
                   length=rng.randint(150, 450), r_task=3.0,
                   l_cot=-0.9, l_nocot=-1.8, correct=True)
           for i in range(60)]
bounds = estimate_bounds(history, min_samples=20, step=1)
band = bounds["depth4"]
print(f"bucket {band.bucket!r}: length band [{band.l_min:.0f}, "
      f"{band.l_max:.0f}] from {band.n} correct rollouts\n")

print("attenuation at tau=8 as responses overshoot the band:")
for length in (band.l_max, band.l_max + 8, band.l_max + 40, band.l_max + 80):
    g = length_attenuation(length, band, tau=8.0)
    print(f"  length {length:>5.0f} -> g = {g:.6f}")

# one prompt's group of four rollouts, one of them far too long
group = [
    Rollout("q17", "depth4", length=260, r_task=3.0,
            l_cot=-0.7, l_nocot=-2.1, correct=True),
    Rollout("q17", "depth4", length=310, r_task=-0.5,
            l_cot=-1.4, l_nocot=-1.6, correct=False),
    Rollout("q17", "depth4", length=205, r_task=3.0,
            l_cot=-0.9, l_nocot=-2.4, correct=True),
    Rollout("q17", "depth4", length=band.l_max + 40, r_task=3.0,
            l_cot=-0.8, l_nocot=-2.0, correct=True),
]

print("\nper-rollout quality reward (bounded log-prob margin):")
for r in group:
    print(f"  l_cot={r.l_cot:+.2f} l_nocot={r.l_nocot:+.2f} "
          f"-> r_q={reasoning_quality_reward(r.l_cot, r.l_nocot):+.4f}")

config = KernelConfig(lambda_q=1.0, tau=8.0)
print("\nfinal advantages (note the attenuated overlong member):")
for res in compute_advantages(group, bounds, config):
    marker = "  <- overlong" if res.g < 1.0 else ""
    print(f"  member {res.member_idx}: R={res.r:+.4f} "
          f"a_tilde={res.a_tilde:+.4f} g={res.g:.4f} "
          f"a_hat={res.a_hat:+.4f}{marker}")

total = sum(res.a_tilde
            for res in compute_advantages(group, bounds, config))
print(f"\nnormalized advantages sum to {total:+.2e} before attenuation")

# turning the quality term off and staying in-band reduces to plain
# group normalization
plain = KernelConfig(lambda_q=0.0)
in_band = [Rollout("q9", "depth4", length=250, r_task=v,
                   l_cot=-1.0, l_nocot=-1.0, correct=v > 0)
           for v in (3.0, -0.5, -2.5)]
for res in compute_advantages(in_band, bounds, plain):
    print(f"  lambda_q=0, in band: member {res.member_idx} "
          f"a_hat={res.a_hat:+.4f}")

groups = group_rollouts(history + group + in_band)
print(f"\ngroup_rollouts found {len(groups)} distinct prompts")
