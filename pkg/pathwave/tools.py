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

import datetime
import json
import logging
import math
import os
import sys
from stat import S_IWRITE

import numpy as np
import pandas as pd

from pytz import utc

from pathwave.errors import DomainError

# =============================================
# check min, python version
if sys.version_info < (3, 7):
    raise SystemError("pathwave requires Python version >= 3.7")
# =============================================

LOG_FORMAT = '%(asctime)s [%(levelname)s]: %(message)s'


def createLogger(name, level=logging.WARNING):
    """ create a named logger with a single stream handler """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    if not any(getattr(h, "_pathwave", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._pathwave = True
        logger.addHandler(handler)
    logger.propagate = False
    return logger

# ---------------------------------------------


class make_object:
    """ create object from dict """

    def __init__(self, **entries):
        self.__dict__.update(entries)

# ---------------------------------------------


def is_number(string):
    """ checks if a string is a number (int/float) """
    string = str(string)
    if string.isnumeric():
        return True
    try:
        float(string)
        return True
    except ValueError:
        return False

# ---------------------------------------------


def as_vector(x, dimension=None):
    """ coerce a position/velocity into a 1-d float array """
    vec = np.atleast_1d(np.asarray(x, dtype=float))
    if vec.ndim != 1:
        raise DomainError("expected a vector, got shape %s" % (vec.shape,))
    if dimension is not None and vec.shape[0] != dimension:
        raise DomainError("expected %d components, got %d" %
                         (dimension, vec.shape[0]))
    return vec

# ---------------------------------------------


def central_gradient(func, x, step):
    """
    central-difference gradient of a scalar field evaluated on
    points of shape (..., N); returns shape (..., N)
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for axis in range(x.shape[-1]):
        shift = np.zeros(x.shape[-1])
        shift[axis] = step
        grad[..., axis] = (np.asarray(func(x + shift)) -
                           np.asarray(func(x - shift))) / (2. * step)
    return grad

# ---------------------------------------------


def fsum_complex(values):
    """ compensated (order-exact) sum of real or complex values """
    values = np.ravel(np.asarray(values))
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return math.fsum(values)

# ---------------------------------------------


def to_jsonable(obj):
    """ convert numpy scalars/arrays and complex values for json """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"real": float(obj.real), "imag": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        obj = float(obj)
        return obj if math.isfinite(obj) else str(obj)
    return obj

# ---------------------------------------------


def config_echo(config):
    """ canonical single-line json rendering of a config dict """
    return json.dumps(to_jsonable(config), sort_keys=True)

# ---------------------------------------------


def utc_timestamp():
    return datetime.datetime.now(utc).strftime("%Y-%m-%dT%H:%M:%SZ")

# ---------------------------------------------


def chmod(f):
    """ change mod to writeable """
    try:
        os.chmod(f, S_IWRITE)  # windows (cover all)
    except Exception as e:
        pass
    try:
        os.chmod(f, 0o666)  # *nix
    except Exception as e:
        pass

# ---------------------------------------------


def write_csv(df, output_file, version, config):
    """ write a DataFrame preceded by the version and config echo """
    with open(output_file, "w", encoding="utf-8", newline="") as fh:
        fh.write("# pathwave %s\n" % version)
        fh.write("# config: %s\n" % config_echo(config))
        df.to_csv(fh, index=False, float_format="%.17g")
    chmod(output_file)
    return output_file

# ---------------------------------------------


def write_json(data, output_file):
    with open(output_file, "w", encoding="utf-8") as fh:
        json.dump(to_jsonable(data), fh, sort_keys=True, indent=2)
        fh.write("\n")
    chmod(output_file)
    return output_file

# ---------------------------------------------


def write_matrix_dump(matrix, output_file):
    """
    binary complex matrix dump: 16-byte header holding (rows, cols) as
    little-endian uint64, then row-major little-endian float64 pairs
    (real, imag)
    """
    matrix = np.ascontiguousarray(matrix, dtype="<c16")
    if matrix.ndim != 2:
        raise DomainError("matrix dump needs a 2-d array")
    with open(output_file, "wb") as fh:
        fh.write(np.array(matrix.shape, dtype="<u8").tobytes())
        fh.write(matrix.tobytes(order="C"))
    chmod(output_file)
    return output_file


def read_matrix_dump(input_file):
    with open(input_file, "rb") as fh:
        rows, cols = np.frombuffer(fh.read(16), dtype="<u8")
        data = np.frombuffer(fh.read(), dtype="<c16")
    return data.reshape(int(rows), int(cols))

# ---------------------------------------------


class DataStore():
    """ accumulates result rows and saves them as a csv artifact """

    def __init__(self, output_file=None, version=None, config=None):
        self.output_file = output_file
        self.version = version
        self.config = config or {}
        self.rows = []

    def record(self, *args, **kwargs):
        """ add a row (dict and/or keyword fields) """
        data = {}
        if len(args) == 1 and isinstance(args[0], dict):
            data.update(args[0])
        if kwargs:
            data.update(kwargs)
        self.rows.append(data)

    def __len__(self):
        return len(self.rows)

    @property
    def recorded(self):
        return pd.DataFrame(self.rows)

    def save(self, output_file=None):
        output_file = output_file or self.output_file
        if output_file is None:
            return None
        return write_csv(self.recorded, output_file,
                         self.version, self.config)
