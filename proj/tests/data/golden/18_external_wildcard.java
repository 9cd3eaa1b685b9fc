import com.example.widgets.*;

class Panel {
    Widget build() {
        return new Widget("ok");
    }
}
