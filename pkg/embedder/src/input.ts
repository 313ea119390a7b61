import { readFileSync } from "fs";
import Papa from "papaparse";
import { IoError, SchemaError } from "./errors.js";

export interface LabeledRows {
  texts: string[];
  labels: number[];
  classNames: string[];
}

function intern(
  label: string,
  ids: Map<string, number>,
  classNames: string[],
): number {
  let id = ids.get(label);
  if (id === undefined) {
    id = classNames.length;
    ids.set(label, id);
    classNames.push(label);
  }
  return id;
}

function collect(
  records: Record<string, unknown>[],
  textCol: string,
  labelCol: string,
): LabeledRows {
  const texts: string[] = [];
  const labels: number[] = [];
  const classNames: string[] = [];
  const ids = new Map<string, number>();
  records.forEach((record, row) => {
    if (!(textCol in record)) {
      throw new SchemaError(`row ${row} has no "${textCol}" column`);
    }
    if (!(labelCol in record)) {
      throw new SchemaError(`row ${row} has no "${labelCol}" column`);
    }
    const label = String(record[labelCol] ?? "");
    if (label === "") throw new SchemaError(`row ${row} has an empty label`);
    texts.push(String(record[textCol] ?? ""));
    labels.push(intern(label, ids, classNames));
  });
  if (texts.length === 0) throw new SchemaError("input holds no rows");
  return { texts, labels, classNames };
}

function parseJsonl(raw: string): Record<string, unknown>[] {
  const records: Record<string, unknown>[] = [];
  raw.split("\n").forEach((line, at) => {
    if (line.trim() === "") return;
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch {
      throw new SchemaError(`line ${at + 1} is not valid JSON`);
    }
    if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
      throw new SchemaError(`line ${at + 1} is not a JSON object`);
    }
    records.push(parsed as Record<string, unknown>);
  });
  return records;
}

function parseCsv(raw: string): Record<string, unknown>[] {
  const result = Papa.parse<Record<string, unknown>>(raw.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (result.errors.length > 0) {
    const first = result.errors[0];
    throw new SchemaError(`csv parse error: ${first.message} (row ${first.row})`);
  }
  return result.data;
}

export function loadRows(
  path: string,
  textCol: string,
  labelCol: string,
  format?: "csv" | "jsonl",
): LabeledRows {
  const kind = format ?? (path.endsWith(".csv") ? "csv" : "jsonl");
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (cause) {
    throw new IoError(`cannot read ${path}: ${(cause as Error).message}`);
  }
  const records = kind === "csv" ? parseCsv(raw) : parseJsonl(raw);
  return collect(records, textCol, labelCol);
}
