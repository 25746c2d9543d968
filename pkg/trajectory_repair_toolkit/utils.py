from dataclasses import fields

import numpy as np

from .exceptions import ConfigError


def rectangle_area(rect):
    """
    Compute the area of an axis-aligned rectangle.

    Parameters
    ----------
    rect : iterable
        An iterable containing the rectangle corners: (x_min, y_min, x_max, y_max).

    Returns
    -------
    area : float
        Rectangle area; zero for degenerate rectangles.
    """
    x_min, y_min, x_max, y_max = rect
    return float(max(0.0, x_max - x_min) * max(0.0, y_max - y_min))


def rectangle_intersection_area(rect1, rect2):
    """
    Compute the intersection area of two axis-aligned rectangles.

    Parameters
    ----------
    rect1 : iterable
        An iterable containing the first rectangle: (x_min, y_min, x_max, y_max).
    rect2 : iterable
        An iterable containing the second rectangle: (x_min, y_min, x_max, y_max).

    Returns
    -------
    area : float
        Area of the intersection; 0 if the rectangles do not overlap.
    """
    rect1_x1, rect1_y1, rect1_x2, rect1_y2 = rect1
    rect2_x1, rect2_y1, rect2_x2, rect2_y2 = rect2

    # Determine the coordinates of the intersection rectangle
    x_left = max(rect1_x1, rect2_x1)
    y_bottom = max(rect1_y1, rect2_y1)
    x_right = min(rect1_x2, rect2_x2)
    y_top = min(rect1_y2, rect2_y2)

    if x_right < x_left or y_top < y_bottom:
        return 0.0

    # The intersection of two axis-aligned rectangles is always an axis-aligned rectangle
    return float((x_right - x_left) * (y_top - y_bottom))


def rectangle_overlap_fraction(rect1, rect2):
    """
    Compute the intersection area relative to the area of the smaller of the two rectangles.

    Parameters
    ----------
    rect1 : iterable
        An iterable containing the first rectangle: (x_min, y_min, x_max, y_max).
    rect2 : iterable
        An iterable containing the second rectangle: (x_min, y_min, x_max, y_max).

    Returns
    -------
    fraction : float
        Overlap fraction in [0, 1]. Zero if either rectangle is degenerate.
    """
    smaller_area = min(rectangle_area(rect1), rectangle_area(rect2))
    if smaller_area <= 0:
        return 0.0

    fraction = rectangle_intersection_area(rect1, rect2) / smaller_area
    assert fraction >= 0.0
    assert fraction <= 1.0 + 1e-12
    return float(min(fraction, 1.0))


def rectangle_union_bounds(rect1, rect2):
    """Bounding rectangle of the union of two rectangles: (x_min, y_min, x_max, y_max)."""
    return (
        min(rect1[0], rect2[0]),
        min(rect1[1], rect2[1]),
        max(rect1[2], rect2[2]),
        max(rect1[3], rect2[3]),
    )


def bounding_rectangle(points, margin=0.0):
    """
    Compute the axis-aligned bounding rectangle of a set of 2D points, expanded by a margin.

    Parameters
    ----------
    points : numpy.ndarray
        An (N, 2) array of point coordinates, N >= 1.
    margin : float, optional
        Distance by which the rectangle is expanded on every side.

    Returns
    -------
    rect : tuple
        Rectangle corners: (x_min, y_min, x_max, y_max).
    """
    points = np.asarray(points, dtype=np.float64)
    x_min, y_min = points.min(axis=0)
    x_max, y_max = points.max(axis=0)
    return float(x_min - margin), float(y_min - margin), float(x_max + margin), float(y_max + margin)


def config_from_mapping(cls, mapping, section):
    """
    Construct a configuration dataclass from a mapping (e.g., a TOML table).

    Parameters
    ----------
    cls : type
        Dataclass type to construct.
    mapping : dict
        Key-value pairs; keys must be field names of the dataclass.
    section : str
        Name of the configuration section, used in error messages.

    Returns
    -------
    config : object
        Instance of `cls`.
    """
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(mapping) - names)
    if unknown:
        raise ConfigError(f"Unknown key(s) in [{section}]: {', '.join(unknown)}")
    try:
        return cls(**mapping)
    except TypeError as e:
        raise ConfigError(f"Invalid [{section}] configuration: {e}") from None
