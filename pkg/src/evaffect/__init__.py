"""Event-stream simulation, TBR encoding, and valence-arousal estimation."""

from .affect import (
    EmotionLabel,
    EmotionTemplateSet,
    RepresentativeFrame,
    VaPair,
    VaSeries,
    build_templates,
    classify,
    normalize_va,
    select_representative,
)
from .errors import (
    ConstantSeriesError,
    FormatError,
    TemplateCoverageError,
    ValidationError,
)
from .events import (
    Event,
    EventStream,
    SensorGeometry,
    concat_streams,
    read_events,
    slice_by_time,
    write_events,
)
from .frames import FrameSequence, load_frame_dir, luminance, read_pgm, write_pgm
from .labeling import (
    Annotation,
    AnnotationTrack,
    LabeledTbrFrame,
    align,
    frame_event_mean_time,
    read_annotations,
    read_labeled,
    write_labeled,
)
from .metrics import (
    DimensionMetrics,
    EvaluationReport,
    evaluate,
    pcc,
    rmse,
    sagr,
)
from .ridge import (
    RidgeModel,
    design_matrix,
    fit,
    pool_features,
    predict,
    predict_series,
    read_model,
    write_model,
)
from .simulate import SimulatorConfig, simulate, upsample
from .tbr import (
    BinarySlice,
    TbrConfig,
    TbrFrame,
    TbrTensorSet,
    binarize,
    encode,
    padded_slices,
    read_tensors,
    unpack_frame,
    write_tensors,
)

__version__ = "0.1.0"
