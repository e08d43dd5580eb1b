# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
XArray
------

Convert metrics reports from and to xarray.Dataset instances
"""
import numpy as np
import xarray as xr
from .. import evaluation

__all__ = ['to_dataset', 'from_dataset']

#: Metrics derived from the counters, per start location
RATES = ("goal_reach_rate", "seen_pct", "unseen_pct", "occupancy",
         "seen_pairing_reach", "unseen_pairing_reach")


def to_dataset(report: evaluation.MetricsReport) -> xr.Dataset:
    """Builds a dataset indexed by the start locations of a report.

    Args:
        report (pygti.evaluation.MetricsReport): Report to convert

    Return:
        xarray.Dataset: the counters and the rates of every start location
        (dimension ``location``), the model identifier being stored as an
        attribute and the aggregated metrics as ``aggregate_*`` attributes.
    """
    locations = report.locations
    data_vars = {
        name: ("location",
               np.array([getattr(item, name) for item in locations],
                        dtype=np.int64))
        for name in evaluation.LocationMetrics.COUNTS
    }
    data_vars.update({
        name: ("location",
               np.array([getattr(item, name) for item in locations],
                        dtype=np.float64))
        for name in RATES
    })
    coords = dict(
        location=np.arange(len(locations), dtype=np.int64),
        start_region=("location",
                      np.array([item.start_region.value
                                for item in locations],
                               dtype=object)),
        x=("location", np.array([item.x for item in locations])),
        y=("location", np.array([item.y for item in locations])))
    attrs = dict(model=report.model)
    attrs.update({
        f"aggregate_{key}": value
        for key, value in report.aggregate().items()
    })
    return xr.Dataset(data_vars, coords=coords, attrs=attrs)


def from_dataset(dataset: xr.Dataset) -> evaluation.MetricsReport:
    """Rebuilds a report from a dataset built by :py:func:`to_dataset`.

    Raises:
        ValueError: if the dataset does not describe a report.
    """
    missing = [
        name for name in evaluation.LocationMetrics.COUNTS +
        ("start_region", "x", "y") if name not in dataset.variables
    ]
    if missing:
        raise ValueError("the dataset does not define " + ", ".join(missing))
    if "model" not in dataset.attrs:
        raise ValueError("the dataset does not define the model attribute")
    locations = []
    for ix in range(dataset.sizes["location"]):
        item = dataset.isel(location=ix)
        counts = {
            name: int(item[name].values)
            for name in evaluation.LocationMetrics.COUNTS
        }
        locations.append(
            evaluation.LocationMetrics(str(item["start_region"].values),
                                       float(item["x"].values),
                                       float(item["y"].values), **counts))
    return evaluation.MetricsReport(str(dataset.attrs["model"]), locations)
