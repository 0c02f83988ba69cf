"""End-to-end triage of web snippets: collect, annotate, train, evaluate, serve.

Pipeline stages map onto submodules:

  collector   query expansion and multi-engine snippet collection
  corpus      canonical records, TSV persistence, stratified splitting
  annotation  dual-annotator workflow with OR adjudication
  features    deterministic tokenize / vocabulary / tf-idf pipeline
  trainer     class-weighted logistic classifier (Adam, warmup+decay)
  metrics     confusion-matrix metrics and the submission evaluator
  triage      semaphore verdicts, ranking, operator feedback journal
  service     HTTP facade for the operator console
  cli         batch entry points for every stage
"""

__version__ = "0.1.0"
