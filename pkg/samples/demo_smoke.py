"""
Segment a generated sprite scene and score the merged foreground
"""

from gwm_segment import TrainConfig, generate, merge_masks, preset, train_internal
from gwm_segment.eval import evaluate_run
from gwm_segment.scenes.storage import save_scene
from gwm_segment.segment import featurize


def main():
    SCENE_DIR = "scenes/two-sprites"  # Where to write the generated scene
    SEED = 0

    scene = generate(preset("two-sprites", seed=SEED))
    save_scene(scene, SCENE_DIR)

    # Learn per-pixel masks on this sequence only
    cfg = TrainConfig(K=4, family="affine", iterations=300, seed=SEED)
    result = train_internal(list(zip(scene.images, scene.flows)), cfg)
    print(f"\n  Final loss: {result.final_loss:.6g}")

    foreground = []
    for t, image in enumerate(scene.images):
        merged = merge_masks(result.segmenter.masks(t), featurize(image))
        foreground.append(merged.foreground)

    print(evaluate_run(scene, foreground).to_text())


if __name__ == "__main__":
    main()
