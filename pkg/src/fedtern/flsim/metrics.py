"""Per-round metrics and the metrics.csv / summary.json writers.

metrics.csv holds only fields that are byte-for-byte reproducible for a
fixed seed; wall-clock timings are kept out of it and reported in
summary.json instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

CSV_COLUMNS = (
    "round",
    "test_accuracy",
    "bytes_enc_upload",
    "bytes_enc_upload_ct",
    "bytes_dec_download",
    "bytes_dec_upload",
    "ct_enc_per_client",
    "ct_dec_per_decryptor",
)


@dataclass
class RoundMetrics:
    round: int
    test_accuracy: float
    bytes_enc_upload: int          # ciphertexts + ternary payloads, all clients
    bytes_enc_upload_ct: int       # ciphertext portion only
    bytes_dec_download: int
    bytes_dec_upload: int
    ct_enc_per_client: int         # 2L for an L-tensor model
    ct_dec_per_decryptor: int      # 3L: 2L downloads + L uploaded partials
    time_train: float
    time_encrypt: float
    time_decrypt: float
    time_recover: float

    def csv_values(self) -> tuple:
        return (self.round, f"{self.test_accuracy:.6f}",
                self.bytes_enc_upload, self.bytes_enc_upload_ct,
                self.bytes_dec_download, self.bytes_dec_upload,
                self.ct_enc_per_client, self.ct_dec_per_decryptor)


def metrics_to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(v) for v in row.csv_values()))
    return "\n".join(lines) + "\n"


def write_outputs(outdir: str | Path, rows, summary: dict,
                  transcript_rows=None) -> dict[str, Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {"metrics": outdir / "metrics.csv", "summary": outdir / "summary.json"}
    paths["metrics"].write_text(metrics_to_csv(rows), encoding="utf-8")
    with open(paths["summary"], "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if transcript_rows is not None:
        paths["transcript"] = outdir / "transcript.jsonl"
        with open(paths["transcript"], "w", encoding="utf-8") as fh:
            for row in transcript_rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    return paths
