// Client-side form validation, applied before anything is sent to the
// server. The server re-validates; this layer exists so bad k/n combos
// never leave the browser.

export interface FormState {
  file: File | null;
  url: string;
  sample: string;
  k: number;
  n: number | null;
}

export interface ValidationResult {
  ok: boolean;
  errors: string[];
}

export function chosenInputs(form: FormState): number {
  let count = 0;
  if (form.file !== null) count += 1;
  if (form.url.trim() !== "") count += 1;
  if (form.sample !== "") count += 1;
  return count;
}

export function validateForm(form: FormState): ValidationResult {
  const errors: string[] = [];
  const inputs = chosenInputs(form);
  if (inputs === 0) errors.push("choose an input: file, URL, or sample");
  if (inputs > 1) errors.push("choose exactly one input");
  if (!Number.isInteger(form.k) || form.k < 1) {
    errors.push("k must be a positive integer");
  }
  if (form.n !== null) {
    if (!Number.isInteger(form.n) || form.n < form.k) {
      errors.push("n must be an integer of at least k");
    } else if (form.k >= 1 && form.n % form.k !== 0) {
      errors.push(`k must divide n (${form.k} does not divide ${form.n})`);
    }
  }
  return { ok: errors.length === 0, errors };
}
