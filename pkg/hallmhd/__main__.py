from hallmhd.CLI import app

app(prog_name="hallmhd")
