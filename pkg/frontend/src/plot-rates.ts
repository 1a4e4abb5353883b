#!/usr/bin/env node
import { runPlot } from "./cli.js";

process.exit(runPlot("rates", process.argv.slice(2)));
