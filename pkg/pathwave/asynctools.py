#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# pathwave: proper-time path integrals for weakly anisotropic wave media
#
# Copyright 2016-2018 Ran Aroussi
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

from threading import Thread, Semaphore
from sys import version_info as sys_version_info

# =============================================
# check min, python version
if sys_version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================


class multitasking():
    """
    Named, class-level worker pools (threads bounded by a semaphore).
    Results always come back in input order, so reductions over them
    do not depend on how many workers ran.
    """

    __POOLS__ = {}
    __POOL_NAME__ = "main"

    @classmethod
    def getPool(cls, name=None):
        if name is None:
            name = cls.__POOL_NAME__
        if name not in cls.__POOLS__:
            cls.createPool(name)

        return {
            "engine": "thread",
            "name": name,
            "threads": cls.__POOLS__[name]["threads"]
        }

    @classmethod
    def createPool(cls, name="main", threads=None):

        cls.__POOL_NAME__ = name

        try:
            threads = int(threads)
        except Exception as e:
            threads = 1

        # 1 thread is no threads
        if threads < 2:
            threads = 0

        cls.__POOLS__[cls.__POOL_NAME__] = {
            "pool": Semaphore(threads) if threads > 0 else None,
            "name": name,
            "threads": threads
        }

    @classmethod
    def map(cls, func, items, name=None):
        """
        Apply ``func`` to every item using the named pool

        :Parameters:
            func : callable
                called once per item
            items : iterable
                work items

        :Optional:
            name : str
                pool name (default: the last created pool)

        :Returns:
            results : list
                ``func(item)`` in the same order as ``items``
        """
        items = list(items)
        if name is None:
            name = cls.__POOL_NAME__
        if name not in cls.__POOLS__:
            cls.createPool(name)
        pool = cls.__POOLS__[name]

        # no threads
        if pool["threads"] == 0 or len(items) < 2:
            return [func(item) for item in items]

        results = [None] * len(items)
        errors = {}

        def _run_via_pool(ix, item):
            with pool["pool"]:
                try:
                    results[ix] = func(item)
                except Exception as e:
                    errors[ix] = e

        tasks = [Thread(target=_run_via_pool, args=(ix, item), daemon=False)
                 for ix, item in enumerate(items)]
        for task in tasks:
            task.start()
        for task in tasks:
            task.join()

        if errors:
            raise errors[min(errors)]
        return results


# =============================================

def blocks(total, size):
    """ fixed-size (start, stop) blocks covering range(total) """
    size = max(1, int(size))
    return [(start, min(start + size, total))
            for start in range(0, total, size)]
