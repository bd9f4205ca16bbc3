"""Command line entry points for the transcription toolkit."""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import evaluation, imaging, pipeline, synthesis
from .classifier import (
    SymbolAlphabet,
    balance_training_set,
    load_manifest,
    save_classifier,
    train_reference,
    write_manifest,
)
from .langmodel import DEFAULT_Q, train as train_lm_model
from .lattice import LatticeParams
from .segmentation import group_image, over_segment, polygonal_segment


@click.group()
def main() -> None:
    """Handwritten word transcription toolkit."""


def _ensure_parent(path: str) -> str:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--n", default=200, show_default=True, help="Words to render.")
@click.option("--seed", default=0, show_default=True)
@click.option("--gap", default=7, show_default=True, help="Blank columns between words.")
@click.option("--samples", default=0, show_default=True,
              help="Also harvest a labeled-sample manifest from this many extra words.")
def synth(out_dir: str, n: int, seed: int, gap: int, samples: int) -> None:
    """Generate synthetic pages, ground truth, and a training corpus."""
    os.makedirs(out_dir, exist_ok=True)
    alphabet = SymbolAlphabet.default()
    rng = np.random.default_rng(seed)
    pages, truth = synthesis.synth_generate(synthesis.LEXICON, n, alphabet, rng, gap=gap)
    for page_id, page in pages:
        imaging.save_binary_png(page, os.path.join(out_dir, f"{page_id}.png"))
    evaluation.write_truth_tsv(truth, os.path.join(out_dir, "truth.tsv"))
    corpus = " ".join(synthesis.build_corpus_words(synthesis.LEXICON))
    with open(os.path.join(out_dir, "corpus.txt"), "w", encoding="utf-8") as fh:
        fh.write(corpus + "\n")
    if samples > 0:
        collected = synthesis.seed_samples(alphabet, rng, n_words=samples)
        manifest = write_manifest(collected, alphabet, os.path.join(out_dir, "samples"))
        click.echo(f"samples: {len(collected)} -> {manifest}")
    click.echo(f"pages: {len(pages)}, words: {len(truth)} -> {out_dir}")


@main.command("synth-pool")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--n", default=50, show_default=True, help="Words to segment into the pool.")
@click.option("--seed", default=0, show_default=True)
def synth_pool(out_dir: str, n: int, seed: int) -> None:
    """Generate an unlabeled segment-group pool for the labeling service."""
    os.makedirs(out_dir, exist_ok=True)
    alphabet = SymbolAlphabet.default()
    rng = np.random.default_rng(seed)
    count = 0
    for k in range(n):
        word = synthesis.LEXICON[int(rng.integers(len(synthesis.LEXICON)))]
        rendered = synthesis.render_word(word, alphabet, None, rng)
        segments = polygonal_segment(rendered.image)
        for i in range(len(segments)):
            for j in range(i, min(i + 2, len(segments))):
                crop = group_image(segments[i : j + 1])
                if crop.shape[1] > 40:
                    continue
                path = os.path.join(out_dir, f"item{count:05d}.png")
                imaging.save_binary_png(crop, path)
                count += 1
    click.echo(f"pool items: {count} -> {out_dir}")


@main.command()
@click.option("--image", "image_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--gap", default=7, show_default=True)
@click.option("--page-id", default=None, help="Defaults to the image file stem.")
def preprocess(image_path: str, out_dir: str, gap: int, page_id: str | None) -> None:
    """Split a page scan into cleaned word images."""
    os.makedirs(out_dir, exist_ok=True)
    pid = page_id or os.path.splitext(os.path.basename(image_path))[0]
    gray = imaging.load_gray(image_path)
    words = pipeline.preprocess_page(gray, gap=gap, page_id=pid)
    for word in words:
        imaging.save_binary_png(word.image, os.path.join(out_dir, f"{word.word_id}.png"))
    click.echo(f"words: {len(words)} -> {out_dir}")


@main.command()
@click.option("--image", "image_path", required=True, type=click.Path(exists=True))
@click.option("--method", default="polygonal", show_default=True,
              type=click.Choice(pipeline.SEGMENTATION_METHODS))
def segment(image_path: str, method: str) -> None:
    """Print the segments of one word image as JSON."""
    bits = imaging.load_binary_png(image_path)
    segments = polygonal_segment(bits) if method == "polygonal" else over_segment(bits)
    rows = [
        {
            "id": s.id,
            "left": s.left,
            "right": s.right,
            "centroid_x": s.centroid_x,
            "ink": s.ink_count,
        }
        for s in segments
    ]
    click.echo(json.dumps(rows, indent=1))


@main.command("train-classifier")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--target", default=1000, show_default=True, help="Samples per class after balancing.")
@click.option("--seed", default=0, show_default=True)
@click.option("--epochs", default=30, show_default=True)
@click.option("--lr", default=0.5, show_default=True)
def train_classifier(manifest_path: str, out_path: str, target: int, seed: int,
                     epochs: int, lr: float) -> None:
    """Train the reference letter classifier from a sample manifest."""
    alphabet = SymbolAlphabet.default()
    samples = load_manifest(manifest_path, alphabet)
    rng = np.random.default_rng(seed)
    balanced = balance_training_set(samples, alphabet, target, rng)
    model = train_reference(
        balanced, alphabet, epochs=epochs, learning_rate=lr, rng=rng
    )
    save_classifier(model, _ensure_parent(out_path))
    click.echo(f"trained on {len(balanced)} samples -> {out_path}")


@main.command("train-lm")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--q", default=DEFAULT_Q, show_default=True, help="Gram order.")
@click.option("--smoothing", default="stupid-backoff", show_default=True,
              type=click.Choice(["none", "stupid-backoff"]))
@click.option("--alpha", default=0.4, show_default=True, help="Backoff discount.")
def train_lm(corpus_path: str, out_path: str, q: int, smoothing: str, alpha: float) -> None:
    """Train the character gram model from a plain-text corpus."""
    from .langmodel import tokenize

    with open(corpus_path, encoding="utf-8") as fh:
        words, dropped = tokenize(fh.read())
    if dropped:
        click.echo(f"dropped {dropped} out-of-alphabet characters", err=True)
    lm = train_lm_model(words, q=q, smoothing=smoothing, alpha=alpha)
    lm.save(_ensure_parent(out_path))
    click.echo(f"trained on {len(words)} words -> {out_path}")


@main.command("init-config")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--classifier", "classifier_path", required=True)
@click.option("--lm", "lm_path", required=True)
@click.option("--counterparts", "counterpart_path", default=None)
def init_config(out_path: str, classifier_path: str, lm_path: str,
                counterpart_path: str | None) -> None:
    """Write a pipeline configuration with default parameters."""
    config = pipeline.PipelineConfig(
        classifier_path=classifier_path,
        lm_path=lm_path,
        counterpart_path=counterpart_path,
        lattice=LatticeParams(),
    )
    config.to_json(_ensure_parent(out_path))
    click.echo(f"config -> {out_path}")


@main.command()
@click.option("--page", "page_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--page-id", default=None, help="Defaults to the image file stem.")
@click.option("--timeout", default=None, type=float, help="Per-word timeout in seconds.")
def transcribe(page_path: str, config_path: str, out_path: str,
               page_id: str | None, timeout: float | None) -> None:
    """Transcribe a page scan to ranked readings per word (JSON lines)."""
    config = pipeline.PipelineConfig.from_json(config_path)
    engine = pipeline.TranscriptionEngine.from_config(config)
    pid = page_id or os.path.splitext(os.path.basename(page_path))[0]
    gray = imaging.load_gray(page_path)
    results = pipeline.transcribe_page(gray, engine, page_id=pid, timeout_s=timeout)
    pipeline.write_results_jsonl(results, _ensure_parent(out_path))
    done = sum(not r.untranscribed for r in results)
    click.echo(f"words: {len(results)} ({done} transcribed) -> {out_path}")


@main.command("transcribe-word")
@click.option("--image", "image_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def transcribe_word(image_path: str, config_path: str) -> None:
    """Transcribe a single word image and print the readings."""
    config = pipeline.PipelineConfig.from_json(config_path)
    engine = pipeline.TranscriptionEngine.from_config(config)
    bits = imaging.load_binary_png(image_path)
    word = imaging.WordImage(bits, os.path.splitext(os.path.basename(image_path))[0], 0, 0)
    result = pipeline.transcribe_word(word, engine)
    click.echo(json.dumps(result.to_json_dict(), indent=1))


@main.command()
@click.option("--results", "results_path", required=True, type=click.Path(exists=True),
              help="A results JSONL file, or a directory of them.")
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def evaluate(results_path: str, truth_path: str, out_path: str | None) -> None:
    """Score transcription results against ground truth."""
    if os.path.isdir(results_path):
        results = []
        for entry in sorted(os.listdir(results_path)):
            if entry.endswith(".jsonl"):
                results.extend(pipeline.read_results_jsonl(os.path.join(results_path, entry)))
    else:
        results = pipeline.read_results_jsonl(results_path)
    truth = evaluation.load_truth_tsv(truth_path)
    report = evaluation.compute_report(results, truth)
    text = json.dumps(report.to_json_dict(), indent=1)
    if out_path:
        with open(_ensure_parent(out_path), "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    click.echo(text)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--pages", "pages_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--truth", "truth_path", required=True, type=click.Path(exists=True))
@click.option("--axis", "axes", multiple=True,
              help="Grid axis as name=v1,v2,... (eta, theta1, theta2, beta, q).")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--timeout", default=evaluation.SWEEP_TIMEOUT_S, show_default=True,
              help="Per-word timeout in seconds at each grid point.")
def sweep(config_path: str, pages_dir: str, truth_path: str, axes: tuple[str, ...],
          out_path: str, timeout: float) -> None:
    """Re-run transcription across a parameter grid and tabulate metrics."""
    if not axes:
        raise click.UsageError("need at least one --axis")
    grid: dict[str, list] = {}
    for spec_str in axes:
        name, _, values = spec_str.partition("=")
        if not values:
            raise click.UsageError(f"bad axis {spec_str!r}, expected name=v1,v2")
        cast = int if name == "q" else float
        grid[name] = [cast(v) for v in values.split(",")]
    config = pipeline.PipelineConfig.from_json(config_path)
    engine = pipeline.TranscriptionEngine.from_config(config)
    words = []
    for entry in sorted(os.listdir(pages_dir)):
        if not entry.endswith(".png"):
            continue
        pid = os.path.splitext(entry)[0]
        gray = imaging.load_gray(os.path.join(pages_dir, entry))
        words.extend(pipeline.preprocess_page(gray, gap=config.gap, page_id=pid))
    truth = evaluation.load_truth_tsv(truth_path)
    rows = evaluation.sweep(grid, words, truth, engine, timeout_s=timeout)
    evaluation.write_sweep_csv(rows, _ensure_parent(out_path))
    click.echo(f"grid points: {len(rows)} over {len(words)} words -> {out_path}")


@main.command("serve-labeling")
@click.option("--pool", "pool_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--journal", "journal_path", default=None, type=click.Path(dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--static", "static_dir", default=None, type=click.Path(file_okay=False),
              help="Directory with the built labeling UI, served at /.")
@click.option("--seed", default=0, show_default=True)
def serve_labeling(pool_dir: str, journal_path: str | None, host: str, port: int,
                   static_dir: str | None, seed: int) -> None:
    """Serve the crowd labeling API (and UI) over HTTP."""
    import uvicorn

    from .labeling import LabelingStore
    from .server import create_app

    alphabet = SymbolAlphabet.default()
    items = {}
    for entry in sorted(os.listdir(pool_dir)):
        if entry.endswith(".png"):
            items[os.path.splitext(entry)[0]] = imaging.load_binary_png(
                os.path.join(pool_dir, entry)
            )
    if not items:
        raise click.UsageError(f"no .png pool items in {pool_dir}")
    store = LabelingStore(
        alphabet,
        items,
        journal_path=journal_path,
        seed=seed,
        exemplars=synthesis.default_exemplars(alphabet, seed=seed),
    )
    app = create_app(store, static_dir=static_dir)
    click.echo(f"labeling service on http://{host}:{port} ({len(items)} pool items)")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
