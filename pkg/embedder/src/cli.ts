#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { defaultJob, runEmbedJob } from "./embed.js";
import { DEFAULT_MODEL, OFFLINE_MODEL } from "./encoder.js";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName("embed")
    .command("$0", "embed a labeled text dataset into a binary vector file")
    .option("in", { type: "string", demandOption: true, describe: "CSV or JSONL input" })
    .option("out", { type: "string", demandOption: true, describe: "output EMB1 path" })
    .option("text-col", { type: "string", default: "text" })
    .option("label-col", { type: "string", default: "label" })
    .option("model", {
      type: "string",
      default: DEFAULT_MODEL,
      describe: `encoder name, or "${OFFLINE_MODEL}" for the deterministic offline encoder`,
    })
    .option("format", { choices: ["csv", "jsonl"] as const, describe: "inferred from the extension when omitted" })
    .option("batch-size", { type: "number", default: 32 })
    .option("max-tokens", { type: "number", default: 512 })
    .option("dim", { type: "number", default: 768, describe: "vector width of the offline encoder" })
    .option("include-padding", { type: "boolean", default: false, describe: "pool over padding positions too" })
    .option("exclude-special", { type: "boolean", default: false, describe: "drop special tokens from the pool" })
    .strict()
    .help()
    .parse();

  const job = defaultJob(args.in, args.out);
  job.textCol = args["text-col"];
  job.labelCol = args["label-col"];
  job.model = args.model;
  job.format = args.format;
  job.batchSize = args["batch-size"];
  job.options.maxTokens = args["max-tokens"];
  job.options.offlineDim = args.dim;
  job.options.maskPadding = !args["include-padding"];
  job.options.includeSpecial = !args["exclude-special"];

  const result = await runEmbedJob(job);
  console.log(
    `wrote ${job.output} (n=${result.rows}, d=${result.dim}, ` +
      `classes=${result.classNames.length})`,
  );
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts")) {
  main(hideBin(process.argv))
    .then((code) => process.exit(code))
    .catch((error: Error) => {
      console.error(JSON.stringify({ error: error.name, message: error.message }));
      process.exit(1);
    });
}
