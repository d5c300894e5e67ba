#!/usr/bin/env python3
# Copyright 2026 The GALDetector Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts ODDS .mat files (arrays X and y) to CSV with a label column.

Usage: odds_to_csv.py thyroid.mat musk.mat --out-dir data/

The output name is the input stem, lower-cased. MATLAB v7.3 files (http,
smtp) are HDF5 and are read with h5py, whose arrays come transposed.
"""

import argparse
import pathlib
import sys

import numpy as np
import pandas as pd


def load_mat(path):
    import h5py
    if h5py.is_hdf5(path):
        with h5py.File(path, "r") as f:
            return (np.asarray(f["X"], dtype=float).T,
                    np.asarray(f["y"]).T.ravel())
    from scipy.io import loadmat
    mat = loadmat(path)
    return np.asarray(mat["X"], dtype=float), np.asarray(mat["y"]).ravel()


def convert(path, out_dir, label_col):
    x, y = load_mat(path)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"{path}: {x.shape[0]} rows but {y.shape[0]} labels")
    frame = pd.DataFrame(x, columns=[f"f{j + 1}" for j in range(x.shape[1])])
    frame[label_col] = y.astype(int)
    out = out_dir / (path.stem.lower() + ".csv")
    frame.to_csv(out, index=False, float_format="%.17g")
    return out, x.shape, int(frame[label_col].sum())


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("inputs", nargs="+", type=pathlib.Path)
    parser.add_argument("--out-dir", type=pathlib.Path, default=pathlib.Path("."))
    parser.add_argument("--label-col", default="label")
    args = parser.parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for path in args.inputs:
        out, shape, anomalies = convert(path, args.out_dir, args.label_col)
        print(f"{out}: {shape[0]} rows, {shape[1]} features, "
              f"{anomalies} anomalies")
    return 0


if __name__ == "__main__":
    sys.exit(main())
