import { SchemaError } from './csv.js';
import { render, type PlotKind } from './render.js';

function usage(): never {
  console.error(
    'usage: render --input <csv> --output <svg> --kind rank-sweep|threshold [--log-y]',
  );
  process.exit(2);
}

function main(argv: string[]): void {
  let input: string | undefined;
  let output: string | undefined;
  let kind: string | undefined;
  let logY = false;
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (arg === '--input') input = argv[++i];
    else if (arg === '--output') output = argv[++i];
    else if (arg === '--kind') kind = argv[++i];
    else if (arg === '--log-y') logY = true;
    else usage();
  }
  if (!input || !output || (kind !== 'rank-sweep' && kind !== 'threshold')) usage();
  try {
    render({ inputCsv: input, outputImage: output, kind: kind as PlotKind, logY });
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      process.exit(1);
    }
    throw err;
  }
  console.log(`wrote ${output}`);
}

main(process.argv.slice(2));
