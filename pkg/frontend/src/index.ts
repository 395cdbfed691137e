import { startConsole } from './server.js';

function arg(name: string, fallback: string): string {
  const idx = process.argv.indexOf(`--${name}`);
  return idx >= 0 && process.argv[idx + 1] ? process.argv[idx + 1] : fallback;
}

const [gatewayHost, gatewayPort] = arg('gateway', '127.0.0.1:7410').split(':');
const listenPort = Number(arg('listen', '8080'));

startConsole(gatewayHost, Number(gatewayPort), listenPort)
  .then((server) => {
    const addr = server.server.address();
    const port = typeof addr === 'object' && addr ? addr.port : listenPort;
    console.log(`console on http://127.0.0.1:${port} ` +
      `(gateway ${gatewayHost}:${gatewayPort})`);
  })
  .catch((err) => {
    console.error(`failed to start: ${err.message}`);
    process.exit(1);
  });
