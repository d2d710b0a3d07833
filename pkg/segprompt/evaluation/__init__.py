from segprompt.evaluation.benchmarks import PromptBenchmark, RefineBenchmark, prompt_benchmark, refine_benchmark
from segprompt.evaluation.metrics import DEFAULT_THRESHOLDS, EvalRecord, MetricsReport, aggregate, iou

__all__ = (
    "DEFAULT_THRESHOLDS",
    "EvalRecord",
    "MetricsReport",
    "iou",
    "aggregate",
    "PromptBenchmark",
    "RefineBenchmark",
    "prompt_benchmark",
    "refine_benchmark",
)
