// The annotator/reviewer id token is the only state that survives reload.

const STORAGE_KEY = "tvcp.annotator_id";

export function currentAnnotator(): string {
  try {
    return window.localStorage.getItem(STORAGE_KEY) ?? "";
  } catch {
    return "";
  }
}

export function setAnnotator(id: string): void {
  try {
    if (id) {
      window.localStorage.setItem(STORAGE_KEY, id);
    } else {
      window.localStorage.removeItem(STORAGE_KEY);
    }
  } catch {
    // storage unavailable: session-only id
  }
}
