# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled transition kernel over byte-vector states (see ``_kernels_py``)."""

from array import array
from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AS_STRING
from libc.string cimport memcpy


def _flatten(rows, ptr, int n_atoms):
    idx = array("i")
    ptr.append(0)
    for row in rows:
        idx.extend(row)
        ptr.append(len(idx))
    for i in idx:
        if i < 0 or i >= n_atoms:
            raise IndexError(f"atom index {i} outside 0..{n_atoms - 1}")
    return idx


cdef class ActionTable:
    cdef readonly int n_atoms
    cdef readonly int n_actions
    cdef int[:] pp_ptr
    cdef int[:] pp_idx
    cdef int[:] pn_ptr
    cdef int[:] pn_idx
    cdef int[:] add_ptr
    cdef int[:] add_idx
    cdef int[:] del_ptr
    cdef int[:] del_idx
    cdef object _keep

    def __init__(self, int n_atoms, pre_pos, pre_neg, adds, dels):
        self.n_atoms = n_atoms
        self.n_actions = len(pre_pos)
        if not len(pre_neg) == len(adds) == len(dels) == self.n_actions:
            raise ValueError("precondition and effect lists differ in length")
        ptrs = [array("i") for _ in range(4)]
        # a trailing sentinel keeps empty index arrays non-empty for memoryviews
        idxs = [_flatten(rows, p, n_atoms) for rows, p in zip((pre_pos, pre_neg, adds, dels), ptrs)]
        for ix in idxs:
            ix.append(-1)
        self._keep = (ptrs, idxs)
        self.pp_ptr, self.pn_ptr, self.add_ptr, self.del_ptr = ptrs
        self.pp_idx, self.pn_idx, self.add_idx, self.del_idx = idxs

    cdef inline bint _ok(self, const unsigned char* s, int a) nogil:
        cdef int k
        for k in range(self.pp_ptr[a], self.pp_ptr[a + 1]):
            if not s[self.pp_idx[k]]:
                return False
        for k in range(self.pn_ptr[a], self.pn_ptr[a + 1]):
            if s[self.pn_idx[k]]:
                return False
        return True

    cdef bytes _apply(self, bytes state, int a):
        cdef Py_ssize_t n = len(state)
        cdef bytes out = PyBytes_FromStringAndSize(NULL, n)
        cdef char* dst = PyBytes_AS_STRING(out)
        cdef int k
        memcpy(dst, PyBytes_AS_STRING(state), n)
        for k in range(self.del_ptr[a], self.del_ptr[a + 1]):
            dst[self.del_idx[k]] = 0
        for k in range(self.add_ptr[a], self.add_ptr[a + 1]):
            dst[self.add_idx[k]] = 1
        return out

    cdef bytes _check(self, state):
        if len(state) != self.n_atoms:
            raise ValueError(f"state has {len(state)} atoms, table expects {self.n_atoms}")
        return bytes(state)

    def is_applicable(self, state, int a):
        cdef bytes s = self._check(state)
        if a < 0 or a >= self.n_actions:
            raise IndexError(a)
        return self._ok(<const unsigned char*>PyBytes_AS_STRING(s), a)

    def applicable(self, state):
        cdef bytes s = self._check(state)
        cdef const unsigned char* p = <const unsigned char*>PyBytes_AS_STRING(s)
        cdef int a
        return [a for a in range(self.n_actions) if self._ok(p, a)]

    def apply(self, state, int a):
        cdef bytes s = self._check(state)
        if a < 0 or a >= self.n_actions:
            raise IndexError(a)
        return self._apply(s, a)

    def expand(self, state):
        cdef bytes s = self._check(state)
        cdef const unsigned char* p = <const unsigned char*>PyBytes_AS_STRING(s)
        cdef int a
        out = []
        for a in range(self.n_actions):
            if self._ok(p, a):
                out.append((a, self._apply(s, a)))
        return out


def count_unsatisfied(goal_pos, goal_neg, state):
    cdef bytes s = bytes(state)
    cdef const unsigned char* p = <const unsigned char*>PyBytes_AS_STRING(s)
    cdef Py_ssize_t n = len(s)
    cdef int i, missing = 0
    for i in goal_pos:
        if i < 0 or i >= n:
            raise IndexError(i)
        if not p[i]:
            missing += 1
    for i in goal_neg:
        if i < 0 or i >= n:
            raise IndexError(i)
        if p[i]:
            missing += 1
    return missing
