"""Atrial fibrillation screening from short inter-beat-interval sequences."""

from .classifier import LabeledSet, LogisticModel, classify, fit, load_model, predict_proba, save_model
from .evaluation import confusion_metrics, forward_feature_selection, kfold_cv, roc_auc
from .features import FeatureVector, extract_features
from .hvg import build_hvg, hvg_disassortative_entropy, hvg_radius
from .preprocess import IBISequence, RawRecording, SampledSignal, SignalKind, ibis_from_recording
from .synth import Rhythm, RhythmSpec, gen_ibis, gen_waveform

__version__ = "0.1.0"
