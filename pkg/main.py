from fastapi import FastAPI, File, UploadFile, Form
from fastapi.responses import JSONResponse, StreamingResponse
from typing import Optional
from io import BytesIO

from agents import MainAgent
from Agents.Exploreragent.explorer import ConfigError, ExplorerConfig
from Agents.Parseragent.smtlib import ParseError

app = FastAPI()
main_agent = MainAgent()


async def _read_input(file: Optional[UploadFile], text: Optional[str]) -> Optional[str]:
    if file is not None:
        data = await file.read()
        return data.decode("utf-8")
    return text or None


def _config(term_depth, rw_depth, example_depth, placeholders, timeout, case_split) -> ExplorerConfig:
    return ExplorerConfig.from_env(
        term_depth=term_depth,
        rw_depth=rw_depth,
        example_depth=example_depth,
        ph_count=placeholders,
        timeout=timeout,
        case_split=case_split,
    )


def _parse_error(exc: ParseError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content={"error": exc.message, "line": exc.line, "column": exc.column},
    )


@app.exception_handler(ParseError)
async def parse_error_handler(request, exc: ParseError):
    return _parse_error(exc)


@app.exception_handler(ConfigError)
async def config_error_handler(request, exc: ConfigError):
    return JSONResponse(status_code=422, content={"error": str(exc)})


@app.post("/explore/")
async def explore_route(
    file: UploadFile = File(None),
    text: Optional[str] = Form(None),
    formaat: str = "json",
    term_depth: Optional[int] = None,
    rw_depth: Optional[int] = None,
    example_depth: Optional[int] = None,
    placeholders: Optional[int] = None,
    timeout: Optional[float] = None,
    case_split: Optional[bool] = None,
    gebruiker: Optional[str] = Form(None),
):
    source = await _read_input(file, text)
    if source is None:
        return JSONResponse(content={"status": "geen input"})
    config = _config(term_depth, rw_depth, example_depth, placeholders, timeout, case_split)
    result = main_agent.explorer.handle(text=source, config=config, user=gebruiker)
    if formaat in ("csv", "excel"):
        mime, data = main_agent.explorer.report(result, formaat)
        return StreamingResponse(BytesIO(data), media_type=mime)
    return JSONResponse(content=result)


@app.post("/prove/")
async def prove_route(
    file: UploadFile = File(None),
    text: Optional[str] = Form(None),
    term_depth: Optional[int] = None,
    rw_depth: Optional[int] = None,
    example_depth: Optional[int] = None,
    placeholders: Optional[int] = None,
    timeout: Optional[float] = None,
    case_split: Optional[bool] = None,
    gebruiker: Optional[str] = Form(None),
):
    source = await _read_input(file, text)
    if source is None:
        return JSONResponse(content={"status": "geen input"})
    config = _config(term_depth, rw_depth, example_depth, placeholders, timeout, case_split)
    result = main_agent.prover.handle(text=source, config=config, user=gebruiker)
    return JSONResponse(content=result)


@app.post("/compare/")
async def compare_route(
    base: UploadFile = File(None),
    a: UploadFile = File(None),
    b: UploadFile = File(None),
    gebruiker: Optional[str] = Form(None),
):
    if base is None or a is None or b is None:
        return JSONResponse(content={"status": "geen input"})
    texts = [(await f.read()).decode("utf-8") for f in (base, a, b)]
    result = main_agent.compare.handle(base=texts[0], a=texts[1], b=texts[2], user=gebruiker)
    return JSONResponse(content=result)


@app.post("/auto/")
async def auto_route(
    text: str = Form(""),
    file: UploadFile | None = File(None),
    gebruiker: str | None = Form(None),
    timeout: Optional[float] = None,
):
    source = await _read_input(file, text) or ""
    config = ExplorerConfig.from_env(timeout=timeout)
    result = main_agent.auto_route(source, user=gebruiker, config=config)
    return JSONResponse(content=result)
