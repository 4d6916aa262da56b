"""Indoor visible-light channel and link simulator."""

from ._owcsim import (
    SceneSemanticError,
    SceneSyntaxError,
    Simulator,
    ber,
    decision_probabilities,
    gain,
    lambert_order,
    lambertian_intensity,
    max_ook_rate,
    optimal_threshold,
    parse_scene,
    pixel_bandwidth,
    run,
    scene_text,
    sinr_for_ber,
    transmission,
)

__all__ = [
    "SceneSemanticError",
    "SceneSyntaxError",
    "Simulator",
    "ber",
    "decision_probabilities",
    "gain",
    "lambert_order",
    "lambertian_intensity",
    "max_ook_rate",
    "optimal_threshold",
    "parse_scene",
    "pixel_bandwidth",
    "run",
    "scene_text",
    "sinr_for_ber",
    "transmission",
]
