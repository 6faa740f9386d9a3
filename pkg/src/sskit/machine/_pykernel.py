"""Pure-Python interpreter kernel.

Reference semantics for the compiled kernel in ``_ckernel.pyx``; both expose
the same three functions and must agree bit for bit.

Bit strings cross this boundary as ASCII ``bytes`` (``b"0101"``).  Opcodes are
``bytes`` of values 0..7.
"""

MOVR, MOVL, FLIP, LOOP, END, OUT, RDZ, RDR = range(8)

HALTED = 0
ABORT_OVERREAD_Z = 1
ABORT_OVERREAD_R = 2
ABORT_STEPS = 3
ABORT_SPACE = 4
ABORT_OUTPUT_CAP = 5
ABORT_LEFT_EDGE = 6

IMPLEMENTATION = "python"


def match_brackets(ops):
    """Jump table for matched brackets, or ``None`` if unbalanced."""
    match = [0] * len(ops)
    stack = []
    for i, op in enumerate(ops):
        if op == LOOP:
            stack.append(i)
        elif op == END:
            if not stack:
                return None
            j = stack.pop()
            match[i] = j
            match[j] = i
    return None if stack else match


def _run(ops, match, z, r, max_steps, max_cells, max_out):
    n = len(ops)
    tape = [0]
    head = 0
    ip = 0
    steps = 0
    zpos = rpos = 0
    out = []
    zn, rn = len(z), len(r)
    status = HALTED
    while ip < n:
        if steps == max_steps:
            status = ABORT_STEPS
            break
        steps += 1
        op = ops[ip]
        if op == MOVR:
            if head + 1 >= max_cells:
                status = ABORT_SPACE
                break
            head += 1
            if head == len(tape):
                tape.append(0)
        elif op == MOVL:
            if head == 0:
                status = ABORT_LEFT_EDGE
                break
            head -= 1
        elif op == FLIP:
            tape[head] ^= 1
        elif op == LOOP:
            if not tape[head]:
                ip = match[ip]
        elif op == END:
            if tape[head]:
                ip = match[ip]
        elif op == OUT:
            if len(out) == max_out:
                status = ABORT_OUTPUT_CAP
                break
            out.append(tape[head])
        elif op == RDZ:
            if zpos == zn:
                status = ABORT_OVERREAD_Z
                break
            tape[head] = z[zpos]
            zpos += 1
        else:
            if rpos == rn:
                status = ABORT_OVERREAD_R
                break
            tape[head] = r[rpos]
            rpos += 1
        ip += 1
    return status, bytes(48 + b for b in out), steps, len(tape), zpos, rpos


def _tape_bits(x: bytes):
    return [c - 48 for c in x]


def run_ops(ops: bytes, z: bytes, r: bytes, max_steps: int, max_cells: int, max_out: int):
    """Execute one body; returns ``(status, output, steps, cells, z_read, r_read)``."""
    match = match_brackets(ops)
    if match is None:
        raise ValueError("unbalanced brackets")
    return _run(ops, match, _tape_bits(z), _tape_bits(r), max_steps, max_cells, max_out)


def iter_bodies(n_ops: int, prefix: bytes = b""):
    """Bracket-balanced opcode strings of length ``n_ops`` in lexicographic order."""
    depth = 0
    for op in prefix:
        depth += (op == LOOP) - (op == END)
        if depth < 0:
            return
    if len(prefix) > n_ops or depth > n_ops - len(prefix):
        return
    ops = list(prefix)

    def rec(pos, d):
        if pos == n_ops:
            yield bytes(ops)
            return
        rem = n_ops - pos - 1
        for op in range(8):
            if op == LOOP:
                if d + 1 > rem:
                    continue
                nd = d + 1
            elif op == END:
                if d == 0:
                    continue
                nd = d - 1
            else:
                if d > rem:
                    continue
                nd = d
            ops.append(op)
            yield from rec(pos + 1, nd)
            ops.pop()

    yield from rec(len(prefix), depth)


def survey(n_ops, prefix, z, r, max_steps, max_cells, max_out):
    """Run every valid body of ``n_ops`` opcodes starting with ``prefix``.

    Returns ``(n_valid, n_halted, first)`` where ``first`` maps each halting
    output to the lexicographically first body producing it.
    """
    zb, rb = _tape_bits(z), _tape_bits(r)
    n_valid = n_halted = 0
    first = {}
    for ops in iter_bodies(n_ops, prefix):
        n_valid += 1
        status, out = _run(ops, match_brackets(ops), zb, rb, max_steps, max_cells, max_out)[:2]
        if status == HALTED:
            n_halted += 1
            if out not in first:
                first[out] = ops
    return n_valid, n_halted, first


def seed_histogram(ops, z, rho, seed_lo, seed_hi, max_steps, max_cells, max_out):
    """Run ``ops`` once per random tape ``r = seed`` (rho bits, MSB first).

    Returns ``(halted_counts, abort_counts)``: output -> count and status -> count.
    """
    match = match_brackets(ops)
    if match is None:
        raise ValueError("unbalanced brackets")
    zb = _tape_bits(z)
    halted = {}
    aborts = {}
    for s in range(seed_lo, seed_hi):
        rb = [(s >> (rho - 1 - i)) & 1 for i in range(rho)]
        status, out = _run(ops, match, zb, rb, max_steps, max_cells, max_out)[:2]
        if status == HALTED:
            halted[out] = halted.get(out, 0) + 1
        else:
            aborts[status] = aborts.get(status, 0) + 1
    return halted, aborts
