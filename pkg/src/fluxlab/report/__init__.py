from .plots import (render_printability_figures, render_training_figures,
                    render_confusion_figure, render_scenario_figure,
                    render_solidity_figure)

__all__ = [
    "render_printability_figures", "render_training_figures",
    "render_confusion_figure", "render_scenario_figure",
    "render_solidity_figure",
]
