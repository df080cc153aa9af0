#cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled event loop for the two-class preemptive-resume M/M/1 queue.

Hot path of the simulator. Draw-for-draw identical to the pure-Python
fallback in _kernel.py: both consume the same PCG64 double streams, so the
two backends produce bit-identical sample paths from the same seeds.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport INFINITY, log1p

import numpy as np

cimport numpy as cnp
from numpy.random cimport bitgen_t

cnp.import_array()

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_bitgen_ptr(object bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("expected a numpy BitGenerator")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


def run_queue(double lam, double mu, double q, long num_customers,
              long warmup, bitgens):
    """Same contract as priopricing._kernel.run_queue."""
    cdef bitgen_t *bg_arr = _bitgen_ptr(bitgens[0])
    cdef bitgen_t *bg_svc = _bitgen_ptr(bitgens[1])
    cdef bitgen_t *bg_cls = _bitgen_ptr(bitgens[2])

    cdef long target = num_customers - warmup
    prem_out_np = np.zeros(target, dtype=np.uint8)
    soj_out_np = np.zeros(target, dtype=np.float64)
    cdef unsigned char[::1] prem_out = prem_out_np
    cdef double[::1] soj_out = soj_out_np

    # per-customer state, grown on demand during the drain phase
    cdef long cap = num_customers + 1024
    arr_time_np = np.empty(cap, dtype=np.float64)
    remaining_np = np.empty(cap, dtype=np.float64)
    premium_np = np.empty(cap, dtype=np.uint8)
    cdef double[::1] arr_time = arr_time_np
    cdef double[::1] remaining = remaining_np
    cdef unsigned char[::1] premium = premium_np

    # FIFO rings of customer indices (power-of-two capacity)
    cdef long cap1 = 1024, head1 = 0, len1 = 0
    cdef long cap2 = 1024, head2 = 0, len2 = 0
    ring1_np = np.empty(cap1, dtype=np.int64)
    ring2_np = np.empty(cap2, dtype=np.int64)
    cdef cnp.int64_t[::1] ring1 = ring1_np
    cdef cnp.int64_t[::1] ring2 = ring2_np

    cdef double now = 0.0
    cdef double u, svc, next_arr, completion
    cdef long serving = -1
    cdef long admitted = 0, departed = 0, counted = 0
    cdef long idx, k
    cdef int is_prem

    u = bg_arr.next_double(bg_arr.state)
    next_arr = -log1p(-u) / lam
    completion = INFINITY

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
            if len1 > 0:
                serving = ring1[head1]
                head1 = (head1 + 1) & (cap1 - 1)
                len1 -= 1
                completion = now + remaining[serving]
            elif len2 > 0:
                serving = ring2[head2]
                head2 = (head2 + 1) & (cap2 - 1)
                len2 -= 1
                completion = now + remaining[serving]
            else:
                serving = -1
                completion = INFINITY
        else:
            now = next_arr
            idx = admitted
            admitted += 1
            if admitted > cap:
                cap = cap * 2
                arr_time_np = _grow_f8(arr_time_np, cap)
                remaining_np = _grow_f8(remaining_np, cap)
                premium_np = _grow_u1(premium_np, cap)
                arr_time = arr_time_np
                remaining = remaining_np
                premium = premium_np
            u = bg_cls.next_double(bg_cls.state)
            is_prem = 1 if u < q else 0
            u = bg_svc.next_double(bg_svc.state)
            svc = -log1p(-u) / mu
            arr_time[idx] = now
            remaining[idx] = svc
            premium[idx] = <unsigned char> is_prem
            u = bg_arr.next_double(bg_arr.state)
            next_arr = now + (-log1p(-u) / lam)
            if serving < 0:
                serving = idx
                completion = now + svc
            elif is_prem and premium[serving] == 0:
                # preempt the ordinary customer in service; it resumes first
                remaining[serving] = completion - now
                if len2 == cap2:
                    ring2_np = _regrow_ring(ring2_np, head2, len2)
                    ring2 = ring2_np
                    head2 = 0
                    cap2 = ring2_np.shape[0]
                head2 = (head2 - 1) & (cap2 - 1)
                ring2[head2] = serving
                len2 += 1
                serving = idx
                completion = now + svc
            elif is_prem:
                if len1 == cap1:
                    ring1_np = _regrow_ring(ring1_np, head1, len1)
                    ring1 = ring1_np
                    head1 = 0
                    cap1 = ring1_np.shape[0]
                ring1[(head1 + len1) & (cap1 - 1)] = idx
                len1 += 1
            else:
                if len2 == cap2:
                    ring2_np = _regrow_ring(ring2_np, head2, len2)
                    ring2 = ring2_np
                    head2 = 0
                    cap2 = ring2_np.shape[0]
                ring2[(head2 + len2) & (cap2 - 1)] = idx
                len2 += 1

    return prem_out_np, soj_out_np, admitted, departed, admitted - departed


def _grow_f8(arr, long new_cap):
    out = np.empty(new_cap, dtype=np.float64)
    out[:arr.shape[0]] = arr
    return out


def _grow_u1(arr, long new_cap):
    out = np.empty(new_cap, dtype=np.uint8)
    out[:arr.shape[0]] = arr
    return out


def _regrow_ring(arr, long head, long count):
    cdef long cap = arr.shape[0]
    out = np.empty(cap * 2, dtype=np.int64)
    cdef cnp.int64_t[::1] src = arr
    cdef cnp.int64_t[::1] dst = out
    cdef long k
    for k in range(count):
        dst[k] = src[(head + k) & (cap - 1)]
    return out
