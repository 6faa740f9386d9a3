# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpreter kernel; mirrors ``_pykernel`` exactly."""

from libc.stdlib cimport malloc, free
from libc.string cimport memset

IMPLEMENTATION = "cython"

cdef enum:
    MOVR = 0
    MOVL = 1
    FLIP = 2
    LOOP = 3
    END = 4
    OUT = 5
    RDZ = 6
    RDR = 7

cdef enum:
    HALTED = 0
    ABORT_OVERREAD_Z = 1
    ABORT_OVERREAD_R = 2
    ABORT_STEPS = 3
    ABORT_SPACE = 4
    ABORT_OUTPUT_CAP = 5
    ABORT_LEFT_EDGE = 6




cdef struct Work:
    unsigned char* tape
    unsigned char* out
    int* match
    int* stack
    int max_steps
    int max_cells
    int max_out
    # results of the last run
    int n_out
    int steps
    int cells
    int zpos
    int rpos


cdef int _match(const unsigned char* ops, int n, int* match, int* stack) nogil:
    cdef int i, sp = 0
    for i in range(n):
        if ops[i] == LOOP:
            stack[sp] = i
            sp += 1
        elif ops[i] == END:
            if sp == 0:
                return -1
            sp -= 1
            match[i] = stack[sp]
            match[stack[sp]] = i
    return -1 if sp else 0


cdef int _run(const unsigned char* ops, int n, const unsigned char* z, int zn,
              const unsigned char* r, int rn, Work* w) nogil:
    cdef int ip = 0, head = 0, steps = 0, zpos = 0, rpos = 0, n_out = 0, cells = 1
    cdef int status = HALTED
    cdef unsigned char op
    cdef unsigned char* tape = w.tape
    w.tape[0] = 0
    while ip < n:
        if steps == w.max_steps:
            status = ABORT_STEPS
            break
        steps += 1
        op = ops[ip]
        if op == MOVR:
            if head + 1 >= w.max_cells:
                status = ABORT_SPACE
                break
            head += 1
            if head == cells:
                tape[head] = 0
                cells += 1
        elif op == MOVL:
            if head == 0:
                status = ABORT_LEFT_EDGE
                break
            head -= 1
        elif op == FLIP:
            tape[head] ^= 1
        elif op == LOOP:
            if tape[head] == 0:
                ip = w.match[ip]
        elif op == END:
            if tape[head] != 0:
                ip = w.match[ip]
        elif op == OUT:
            if n_out == w.max_out:
                status = ABORT_OUTPUT_CAP
                break
            w.out[n_out] = 48 + tape[head]
            n_out += 1
        elif op == RDZ:
            if zpos == zn:
                status = ABORT_OVERREAD_Z
                break
            tape[head] = z[zpos] - 48
            zpos += 1
        else:
            if rpos == rn:
                status = ABORT_OVERREAD_R
                break
            tape[head] = r[rpos] - 48
            rpos += 1
        ip += 1
    w.n_out = n_out
    w.steps = steps
    w.cells = cells
    w.zpos = zpos
    w.rpos = rpos
    return status


cdef Work* _alloc(int n, int max_steps, int max_cells, int max_out) except NULL:
    if max_steps < 1 or max_cells < 1 or max_out < 1:
        raise ValueError("budgets must be positive")
    cdef Work* w = <Work*> malloc(sizeof(Work))
    if w == NULL:
        raise MemoryError()
    w.tape = <unsigned char*> malloc(max_cells)
    w.out = <unsigned char*> malloc(max_out)
    w.match = <int*> malloc(sizeof(int) * (n + 1))
    w.stack = <int*> malloc(sizeof(int) * (n + 1))
    if w.tape == NULL or w.out == NULL or w.match == NULL or w.stack == NULL:
        _release(w)
        raise MemoryError()
    w.max_steps = max_steps
    w.max_cells = max_cells
    w.max_out = max_out
    return w


cdef void _release(Work* w):
    free(w.tape)
    free(w.out)
    free(w.match)
    free(w.stack)
    free(w)


def match_brackets(ops):
    cdef bytes b = bytes(ops)
    cdef int n = len(b)
    cdef int* match = <int*> malloc(sizeof(int) * (n + 1))
    cdef int* stack = <int*> malloc(sizeof(int) * (n + 1))
    try:
        memset(match, 0, sizeof(int) * (n + 1))
        if _match(b, n, match, stack) < 0:
            return None
        return [match[i] for i in range(n)]
    finally:
        free(match)
        free(stack)


def run_ops(bytes ops, bytes z, bytes r, int max_steps, int max_cells, int max_out):
    cdef int n = len(ops)
    cdef Work* w = _alloc(n, max_steps, max_cells, max_out)
    cdef int status
    try:
        if _match(ops, n, w.match, w.stack) < 0:
            raise ValueError("unbalanced brackets")
        status = _run(ops, n, z, len(z), r, len(r), w)
        return (status, w.out[:w.n_out], w.steps, w.cells, w.zpos, w.rpos)
    finally:
        _release(w)


def survey(int n_ops, bytes prefix, bytes z, bytes r, int max_steps, int max_cells, int max_out):
    cdef int plen = len(prefix)
    cdef int n_valid = 0, n_halted = 0
    cdef dict first = {}
    cdef int pos, op, d, rem, i, depth = 0
    cdef const unsigned char* zp = z
    cdef const unsigned char* rp = r
    cdef int zn = len(z), rn = len(r)
    if plen > n_ops:
        return 0, 0, first
    for i in range(plen):
        if prefix[i] == LOOP:
            depth += 1
        elif prefix[i] == END:
            depth -= 1
            if depth < 0:
                return 0, 0, first
    if depth > n_ops - plen:
        return 0, 0, first

    cdef Work* w = _alloc(n_ops, max_steps, max_cells, max_out)
    cdef unsigned char* ops = <unsigned char*> malloc(n_ops + 1)
    cdef int* dep = <int*> malloc(sizeof(int) * (n_ops + 1))
    cdef int* cur = <int*> malloc(sizeof(int) * (n_ops + 1))
    cdef bytes key
    try:
        for i in range(plen):
            ops[i] = prefix[i]
        if plen == n_ops:
            n_valid = 1
            _match(ops, n_ops, w.match, w.stack)
            if _run(ops, n_ops, zp, zn, rp, rn, w) == HALTED:
                n_halted = 1
                first[w.out[:w.n_out]] = ops[:n_ops]
            return n_valid, n_halted, first
        pos = plen
        dep[pos] = depth
        cur[pos] = -1
        while pos >= plen:
            op = cur[pos] + 1
            d = dep[pos]
            rem = n_ops - pos - 1
            while op < 8:
                if op == LOOP:
                    if d + 1 <= rem:
                        break
                elif op == END:
                    if d > 0:
                        break
                elif d <= rem:
                    break
                op += 1
            if op == 8:
                pos -= 1
                continue
            cur[pos] = op
            ops[pos] = <unsigned char> op
            if pos == n_ops - 1:
                n_valid += 1
                _match(ops, n_ops, w.match, w.stack)
                if _run(ops, n_ops, zp, zn, rp, rn, w) == HALTED:
                    n_halted += 1
                    key = w.out[:w.n_out]
                    if key not in first:
                        first[key] = ops[:n_ops]
            else:
                dep[pos + 1] = d + (op == LOOP) - (op == END)
                cur[pos + 1] = -1
                pos += 1
        return n_valid, n_halted, first
    finally:
        free(ops)
        free(dep)
        free(cur)
        _release(w)


def seed_histogram(bytes ops, bytes z, int rho, long long seed_lo, long long seed_hi,
                   int max_steps, int max_cells, int max_out):
    cdef int n = len(ops)
    cdef Work* w = _alloc(n, max_steps, max_cells, max_out)
    cdef unsigned char* r = <unsigned char*> malloc(rho + 1)
    cdef dict halted = {}
    cdef dict aborts = {}
    cdef long long s
    cdef int i, status
    cdef bytes key
    try:
        if _match(ops, n, w.match, w.stack) < 0:
            raise ValueError("unbalanced brackets")
        for s in range(seed_lo, seed_hi):
            for i in range(rho):
                r[i] = 48 + ((s >> (rho - 1 - i)) & 1)
            status = _run(ops, n, z, len(z), r, rho, w)
            if status == HALTED:
                key = w.out[:w.n_out]
                halted[key] = halted.get(key, 0) + 1
            else:
                aborts[status] = aborts.get(status, 0) + 1
        return halted, aborts
    finally:
        free(r)
        _release(w)
