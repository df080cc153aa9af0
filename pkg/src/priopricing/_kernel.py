"""Pure-Python event loop for the two-class preemptive-resume M/M/1 queue.

Fallback backend. The compiled kernel in _kernel_c.pyx implements the same
loop and must consume the three random streams in exactly the same order,
so both backends produce bit-identical sample paths from the same seeds.
"""

from collections import deque
from math import inf, log1p

import numpy as np

_BLOCK = 1 << 14


class _DoubleStream:
    # buffered scalar doubles from a numpy BitGenerator; block draws yield
    # the same sequence as repeated single draws
    __slots__ = ("_gen", "_buf", "_i")

    def __init__(self, bitgen):
        self._gen = np.random.Generator(bitgen)
        self._buf = self._gen.random(_BLOCK)
        self._i = 0

    def next(self):
        i = self._i
        if i == _BLOCK:
            self._buf = self._gen.random(_BLOCK)
            i = 0
        self._i = i + 1
        return self._buf[i]


def run_queue(lam, mu, q, num_customers, warmup, bitgens):
    """Simulate until every counted customer (index warmup..num-1) departs.

    Arrivals keep flowing during the drain so late ordinary customers still
    feel preemption pressure; the extras are admitted but not counted.
    Returns (premium flags, sojourns) indexed by arrival order for counted
    customers, plus (admitted, departed, in_system) totals at stop time.
    """
    s_arr, s_svc, s_cls = (_DoubleStream(bg) for bg in bitgens)
    target = num_customers - warmup
    prem_out = np.zeros(target, dtype=np.uint8)
    soj_out = np.zeros(target, dtype=np.float64)

    arr_time = []  # per admitted customer, arrival order
    remaining = []
    premium = []

    q1 = deque()  # premium indices awaiting service
    q2 = deque()  # ordinary indices; a preempted one resumes from the left

    now = 0.0
    next_arr = -log1p(-s_arr.next()) / lam
    serving = -1
    completion = inf
    admitted = 0
    departed = 0
    counted = 0

    while counted < target:
        if serving >= 0 and completion <= next_arr:
            # completion first on (measure-zero) timestamp ties
            now = completion
            idx = serving
            departed += 1
            if warmup <= idx < num_customers:
                k = idx - warmup
                soj_out[k] = now - arr_time[idx]
                prem_out[k] = premium[idx]
                counted += 1
            if q1:
                serving = q1.popleft()
                completion = now + remaining[serving]
            elif q2:
                serving = q2.popleft()
                completion = now + remaining[serving]
            else:
                serving = -1
                completion = inf
        else:
            now = next_arr
            idx = admitted
            admitted += 1
            is_prem = 1 if s_cls.next() < q else 0
            svc = -log1p(-s_svc.next()) / mu
            arr_time.append(now)
            remaining.append(svc)
            premium.append(is_prem)
            next_arr = now + (-log1p(-s_arr.next()) / lam)
            if serving < 0:
                serving = idx
                completion = now + svc
            elif is_prem and not premium[serving]:
                # preempt the ordinary customer in service; it resumes first
                remaining[serving] = completion - now
                q2.appendleft(serving)
                serving = idx
                completion = now + svc
            elif is_prem:
                q1.append(idx)
            else:
                q2.append(idx)

    return prem_out, soj_out, admitted, departed, admitted - departed
